"""Finite-volume non-commutative L_p and Orlicz spaces for quantum spin lattices."""

__version__ = "0.1.0"

from .algebra import *  # noqa: F401,F403
from .gibbs import *  # noqa: F401,F403
from .lp import *  # noqa: F401,F403
from .condexp import *  # noqa: F401,F403
from .orlicz import *  # noqa: F401,F403

