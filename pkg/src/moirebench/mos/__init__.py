"""Mean-opinion-score study protocol and its serving layer."""

from .study import (
    MosQuery,
    MosStudy,
    Rating,
    RatingStore,
    compute_mos,
    create_study,
    export_results,
    load_study,
    save_study,
    select_mos_images,
)

__all__ = [
    "MosQuery",
    "MosStudy",
    "Rating",
    "RatingStore",
    "compute_mos",
    "create_study",
    "export_results",
    "load_study",
    "save_study",
    "select_mos_images",
]
