"""Anonymous group calls over PIR."""

from ._core import *  # noqa: F401,F403
from ._core import PiratesError, __doc__  # noqa: F401
