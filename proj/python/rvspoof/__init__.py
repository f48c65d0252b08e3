"""Python surface of the rvspoof toolkit."""
try:
    from ._rvspoof import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _rvspoof import *  # noqa: F401,F403
