"""wdp-triage: route auction winner determination between greedy and exact solvers."""

__version__ = "0.1.0"

# Import subpackages so families and solvers register themselves
from wdp_triage import generators, solvers  # noqa: E402, F401
