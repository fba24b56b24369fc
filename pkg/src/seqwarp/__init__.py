"""Numerical verification of warped submanifold geometry in flat Kaehler ambients."""
from .checks import CHECK_NAMES, CheckContext, run_checks
from .geometry import BatchGeometry, ImmersionSpec, geometry_at
from .harness import run_check, run_sweep
from .jetcore import BACKEND, Jet, JetSpace, jet_space
from .manifest import Manifest, ManifestError, load_manifest, resolve_manifest
from .warped import WarpingFunctions

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BatchGeometry",
    "CHECK_NAMES",
    "CheckContext",
    "ImmersionSpec",
    "Jet",
    "JetSpace",
    "Manifest",
    "ManifestError",
    "WarpingFunctions",
    "__version__",
    "geometry_at",
    "jet_space",
    "load_manifest",
    "resolve_manifest",
    "run_check",
    "run_checks",
    "run_sweep",
]
