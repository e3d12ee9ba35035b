from .extractors import (FeatureError, NAMED_PRODUCTIONS, ProductionHistogram,
                         count_t_units, lexical_features, lexicon_features,
                         production_histogram, production_name,
                         readability_features, semantic_similarity_features,
                         syntactic_features, valence_features)
from .lexicons import (LexiconError, LexiconSet, demo_lexicons_path,
                       load_demo_lexicons, load_lexicons, parse_lexicons)
from .matrix import (FeatureMatrix, apply_imputer, apply_standardizer,
                     compute_features, extract_matrix, fit_imputer,
                     fit_standardizer, read_matrix_csv, write_matrix_csv)
from .registry import (RegistryError, auto_production_names, named_features,
                       validate_registry)
from .syllables import count_syllables

__all__ = [
    "FeatureError", "FeatureMatrix", "LexiconError", "LexiconSet",
    "NAMED_PRODUCTIONS", "ProductionHistogram", "RegistryError", "apply_imputer",
    "apply_standardizer", "auto_production_names", "compute_features",
    "count_syllables", "count_t_units", "demo_lexicons_path", "extract_matrix",
    "fit_imputer", "fit_standardizer", "lexical_features", "lexicon_features",
    "load_demo_lexicons", "load_lexicons", "named_features", "parse_lexicons",
    "production_histogram", "production_name", "read_matrix_csv",
    "readability_features", "semantic_similarity_features",
    "syntactic_features", "valence_features", "validate_registry",
    "write_matrix_csv",
]
