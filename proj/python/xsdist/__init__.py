from ._xsdist import *  # noqa: F401,F403
