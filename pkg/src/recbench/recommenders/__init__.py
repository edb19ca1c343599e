"""Recommender registry.

Every model is a scikit-learn style estimator: hyperparameters are
constructor arguments (so ``get_params``/``set_params``/``clone`` work),
``fit`` accepts a :class:`~recbench.dataset.Dataset` or a user x item
matrix, and ``recommend`` returns ranked lists.  New models only need to
subclass :class:`BaseRecommender` and be added to :data:`MODELS`.
"""
from .base import BaseRecommender, RecommendationLists, check_interactions, rank_scores
from .baselines import MostPopRecommender, RandomRecommender
from .bpr import BPRMF, bpr_gradient, bpr_loss
from .knn import AttributeItemKNN, ItemKNN, UserKNN
from .svd import PureSVD, truncated_svd

MODELS = {
    "Random": RandomRecommender,
    "MostPop": MostPopRecommender,
    "ItemKNN": ItemKNN,
    "UserKNN": UserKNN,
    "AttributeItemKNN": AttributeItemKNN,
    "PureSVD": PureSVD,
    "BPRMF": BPRMF,
}


def make_model(name, **params) -> BaseRecommender:
    try:
        cls = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; valid: {', '.join(MODELS)}") from None
    return cls(**params)


__all__ = [
    "MODELS", "make_model", "BaseRecommender", "RecommendationLists", "check_interactions",
    "rank_scores", "RandomRecommender", "MostPopRecommender", "ItemKNN", "UserKNN",
    "AttributeItemKNN", "PureSVD", "BPRMF", "truncated_svd", "bpr_loss", "bpr_gradient",
]
