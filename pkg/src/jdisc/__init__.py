"""J-complex discs attached to Lagrangian tori in C^n.

Almost complex structures are encoded by their complex matrix A (taming is
``||A|| < 1``); discs are truncated polynomials in zeta and conj(zeta); the
boundary value problem is solved by Newton's method on linear
Riemann-Hilbert problems and continued in the structure parameter.
"""

__version__ = "0.1.0"

from .acs import a_to_j, is_calibrated, is_tamed, j_to_a  # noqa: E402
from .continuation import (  # noqa: E402
    HomotopyTrace,
    bubbling_diagnostic,
    newton_correct,
    nonsqueezing_demo,
    solve_higher_dim,
    sweep_foliation,
    trace_family,
)
from .disc import DiscFunction, cauchy_green  # noqa: E402
from .fields import builtin_field  # noqa: E402
from .local import normalize_chart, solve_local  # noqa: E402
from .rh import dbar_distance_witness, fredholm_index, solve_linear_rh  # noqa: E402
from .solution import DiscSolution  # noqa: E402
from .torus import TorusSpec  # noqa: E402
