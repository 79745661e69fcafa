"""Herman rings of the cubic Blaschke family compared with quadratic Siegel disks.

Submodules: ``cfrac`` (rotation numbers), ``dynamics`` (the two map
families), ``circle`` (slice tuning), ``param_search`` (ratio residuals,
refinement, verification), ``geometry`` (similarity, scaling, depth and
triangle checks), ``render`` (grids and images) and ``cli``.
"""

from ._accel import BACKEND
from .cfrac import RotationNumber
from .dynamics import BlaschkeCubic, QuadraticSiegel

__version__ = "0.1.0"

__all__ = ["BACKEND", "BlaschkeCubic", "QuadraticSiegel", "RotationNumber", "__version__"]
