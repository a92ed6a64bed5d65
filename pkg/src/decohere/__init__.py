"""Dephasing of qubit registers by two-level and oscillator baths.

Decohering factors, reduced density matrices, decoherence-free subspaces,
decoherence times and Shor-algorithm statistics for QND-coupled registers.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DecohereError,
    DomainError,
    KernelValidityError,
    NoDecayError,
    NumericError,
    ResourceCapError,
)
from .registers import *  # noqa: E402,F401,F403
from .environment import *  # noqa: E402,F401,F403
from .decoherence import *  # noqa: E402,F401,F403
from .density import *  # noqa: E402,F401,F403
from .shor import *  # noqa: E402,F401,F403
