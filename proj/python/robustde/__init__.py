"""Model-robust direct effect estimation."""

try:
    from ._robustde import *  # noqa: F401,F403  (installed layout)
except ImportError:
    from _robustde import *  # noqa: F401,F403  (in-tree build on PYTHONPATH)

__version__ = "0.1.0"
