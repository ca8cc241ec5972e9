"""hypersym: exact verification engine for confluent hypergeometric and
Humbert series, their shift-operator algebra, and the generating relations
the operators induce.

Subpackages by concern: :mod:`hypersym.exactnum` (rational scalars),
:mod:`hypersym.series` (truncated multivariate series),
:mod:`hypersym.hypfun` (function evaluators and recursion checks),
:mod:`hypersym.liealg` (operators, actions, commutators, flows),
:mod:`hypersym.identities` (generating-relation catalogue and suite),
:mod:`hypersym.cli` (command line).
"""

__version__ = "0.1.0"

from .exactnum import parse_rational, pochhammer  # noqa: E402
from .hypfun import Params1F1, ParamsPsi2  # noqa: E402

__all__ = [
    "__version__",
    "Params1F1",
    "ParamsPsi2",
    "parse_rational",
    "pochhammer",
]
