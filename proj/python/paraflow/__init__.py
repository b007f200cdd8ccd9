"""Parametric minimum-cost flows with certified error bounds."""

try:
    from ._paraflow import *  # noqa: F401,F403  (installed layout)
    from . import _paraflow as _core
except ImportError:  # in-tree layout: extension on PYTHONPATH next to build dir
    from _paraflow import *  # noqa: F401,F403
    import _paraflow as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = "0.1.0"
