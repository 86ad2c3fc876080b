"""Streaming label cleaning, clip sampling and segmental metrics for online
temporal action segmentation."""

from .cleaner import (Append, Backdate, Cleaner, CleanerConfig, Finalize, InvalidConfig, clean,
                      reference_clean)
from .core import ClassMap, LabelStream, Segment, labels_from_segments, rle_segments, validate_stream
from .cutoffs import ClassBased, ClassLengthStats, Static, fit_class_stats, resolve_cutoff
from .metrics import edit_score, f1_at_iou, mof_accuracy, report

__all__ = [
    "Append", "Backdate", "Cleaner", "CleanerConfig", "Finalize", "InvalidConfig", "clean",
    "reference_clean", "ClassMap", "LabelStream", "Segment", "labels_from_segments",
    "rle_segments", "validate_stream", "ClassBased", "ClassLengthStats", "Static",
    "fit_class_stats", "resolve_cutoff", "edit_score", "f1_at_iou", "mof_accuracy", "report",
]

__version__ = "0.1.0"
