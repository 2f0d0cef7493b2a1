"""Degenerate Hopf bifurcations of the Watt governor with a spring.

Modules: ``jet`` (derivative tensors), ``hopf`` (center-manifold coefficient
ladder), ``wgss`` (the governor model), ``locus`` (l1 = 0 surface,
l1 = l2 = 0 curves, the codimension-4 point), ``orbits`` (integration and
Poincare census) and ``cli``.
"""

from .hopf import CoefficientLadder, lyapunov_coefficients, make_frame, run_ladder
from .wgss import WgssParams, analytic_jet, epsilon_critical

__version__ = "0.1.0"

__all__ = [
    "CoefficientLadder",
    "WgssParams",
    "analytic_jet",
    "epsilon_critical",
    "lyapunov_coefficients",
    "make_frame",
    "run_ladder",
]
