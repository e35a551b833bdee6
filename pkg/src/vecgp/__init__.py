"""Tree-based genetic programming with interchangeable scalar and vector evaluators."""

from .core import Backend, Config, Direction, Kernel, KernelKind, Tree, TreeType, validate_tree
from .data import ColumnStore, load_csv, split_train_test, synth_dataset
from .evolve import RunResult, run_evolution

__version__ = "0.1.0"

__all__ = [
    "Backend", "ColumnStore", "Config", "Direction", "Kernel", "KernelKind", "RunResult",
    "Tree", "TreeType", "load_csv", "run_evolution", "split_train_test", "synth_dataset",
    "validate_tree",
]
