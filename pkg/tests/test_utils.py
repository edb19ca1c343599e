import math

import numpy as np
import pytest

from recbench.utils import (check_fraction, check_positive_int, check_rng, derive_seed, fmean,
                            log_stage, make_rng, ratio_count)


def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed(42, "ItemKNN", 0) == derive_seed(42, "ItemKNN", 0)
    assert derive_seed(42, "ItemKNN", 0) != derive_seed(42, "ItemKNN", 1)
    assert derive_seed(42, "a", "b") != derive_seed(42, "ab")
    assert 0 <= derive_seed("x") < 2**63
    assert make_rng(1, "s").random() == make_rng(1, "s").random()


def test_check_rng():
    g = np.random.default_rng(0)
    assert check_rng(g) is g
    assert check_rng(5).random() == np.random.default_rng(5).random()
    with pytest.raises(TypeError):
        check_rng("seed")


def test_ratio_count_absorbs_float_noise():
    assert ratio_count(0.7, 10) == 7
    assert ratio_count(0.2, 5) == 1
    assert ratio_count(0.2, 6) == 2


def test_validators():
    assert check_positive_int(3.0, "k") == 3
    for bad in (0, True, 2.5, "3"):
        with pytest.raises(ValueError):
            check_positive_int(bad, "k")
    assert check_fraction(0.5, "r") == 0.5
    for bad in (0, 1, 1.5, True):
        with pytest.raises(ValueError):
            check_fraction(bad, "r")


def test_fmean():
    assert fmean([0.1] * 10) == pytest.approx(0.1, abs=0)
    assert math.isnan(fmean([]))


def test_log_stage_rejects_unknown_tag():
    with pytest.raises(ValueError):
        log_stage("NOPE", "x")
