"""Mixed-boundary Laplace eigenproblems and drop-shape optimization."""

from spectral_drop._core import *  # noqa: F401,F403
from spectral_drop._core import __version__  # noqa: F401
