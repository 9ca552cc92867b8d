"""Camera-model attribution for video files.

Parses MP4-family containers and H.264 parameter sets into a joint
file-metadata tree, and classifies the producing camera model (or editing
tool / platform) with a two-level scheme: structural metaclass assignment
followed by per-metaclass decision trees.
"""

__version__ = "0.1.0"

from .bmff import BoxTree, FieldValue, RawBox, extract_parameter_set_blobs, parse_boxes
from .h264 import (CoreParams, EncodingSetting, PpsParams, SpsParams, VuiParams,
                   core_param_vector, parse_pps, parse_sps, unescape_rbsp)
from .model import (AnalyzedFile, HierarchicalModel, Prediction, analyze_path,
                    analyze_source, load_model, predict_model, save_model, train_model)
from .tree import (ExclusionList, MetaTree, TreeNode, build_codec_subtree,
                   build_container_subtree, join, load_exclusion_profile, prune,
                   strip_values)

__all__ = [
    "AnalyzedFile", "BoxTree", "CoreParams", "EncodingSetting", "ExclusionList",
    "FieldValue", "HierarchicalModel", "MetaTree", "PpsParams", "Prediction",
    "RawBox", "SpsParams", "TreeNode", "VuiParams", "analyze_path", "analyze_source",
    "build_codec_subtree", "build_container_subtree", "core_param_vector",
    "extract_parameter_set_blobs", "join", "load_exclusion_profile", "load_model",
    "parse_boxes", "parse_pps", "parse_sps", "predict_model", "prune", "save_model",
    "strip_values", "train_model", "unescape_rbsp",
]
