"""Near-to-far track-back labeling and loss-weighted importance sampling."""

try:
    from ._nearfar import *  # noqa: F401,F403
    from ._nearfar import __doc__  # noqa: F401
except ImportError:  # pragma: no cover - source-tree layout during development
    from _nearfar import *  # noqa: F401,F403
