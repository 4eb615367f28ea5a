"""Gaze-guided text generation: Python surface over the C++ core."""

try:
    from ._gazegen import *  # noqa: F401,F403  (installed package layout)
    from ._gazegen import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _gazegen import *  # noqa: F401,F403
    from _gazegen import __version__  # noqa: F401
