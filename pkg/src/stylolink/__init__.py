"""Cross-site account linking from writing style."""

from stylolink.corpus import (
    AuthorProfile,
    CleaningConfig,
    ExperimentSets,
    MatchSet,
    Post,
    build_profiles,
    clean_post,
    load_ground_truth,
    select_experiment_sets,
)
from stylolink.features import FeatureCategory, FeatureVector, ProfileFeatures, extract_profile
from stylolink.mllf import LinkResult, MLLFConfig, mllf_link, mllf_run
from stylolink.ranker import RankedList, chi_square_distance, combined_distance, rank_known

__version__ = "0.1.0"
