"""Types, terms, patterns and programs in one namespace, with the type operations."""

from __future__ import annotations

from .syntax import *  # noqa: F401,F403
from .types import *  # noqa: F401,F403
from .types import (  # noqa: F401
    alpha_equal,
    eliminate_exbar,
    intro_shape,
    reabstract,
    subst_type,
    well_formed,
)
from .pretty import pretty_print  # noqa: F401
