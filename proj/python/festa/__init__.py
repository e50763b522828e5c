"""Black-box uncertainty estimation for multimodal MCQA models.

The heavy lifting lives in the compiled ``_festa`` extension; this package
re-exports its surface.
"""

try:
    from ._festa import *  # noqa: F401,F403  (installed package layout)
    from ._festa import __version__  # noqa: F401
except ImportError:  # in-tree build: module sits next to the package dir
    from _festa import *  # noqa: F401,F403
    from _festa import __version__  # noqa: F401
