"""Iterated function systems: attractors, code space, coding maps and property checks."""
from .codespace import AddressSpec, Alphabet, Word, code_distance, parse_address, parse_word, periodicize
from .config import load_config
from .contractions import ComparisonFunction, ContractionMap, eval_map, eval_word
from .ifscore import (AttractorResult, IfsInstance, attractor, chaos_game, coding_map, diminishing_certificate,
                      fractal_operator, word_fixed_point)
from .metricsets import PointCloud, diameter, hausdorff, read_cloud, write_cloud

__version__ = "0.1.0"

__all__ = [
    "AddressSpec", "Alphabet", "AttractorResult", "ComparisonFunction", "ContractionMap", "IfsInstance",
    "PointCloud", "Word", "attractor", "chaos_game", "code_distance", "coding_map", "diameter",
    "diminishing_certificate", "eval_map", "eval_word", "fractal_operator", "hausdorff", "load_config",
    "parse_address", "parse_word", "periodicize", "read_cloud", "write_cloud", "word_fixed_point",
]
