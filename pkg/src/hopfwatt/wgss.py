"""Watt governor with a spring in nondimensional form.

State ``(x, y, z)``: arm angle, its (scaled) rate, and scaled engine speed.
Parameters ``(beta, alpha, epsilon, kappa)`` are load ratio, engine gain,
damping and spring stiffness ratio.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .jet import MAX_ORDER, VectorFieldJet, multiplicities


@dataclass(frozen=True)
class WgssParams:
    beta: float
    alpha: float
    epsilon: float
    kappa: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError(f"kappa must lie in [0, 1), got {self.kappa}")

    @classmethod
    def critical(cls, beta, alpha, kappa=0.0):
        """Parameters on the Hopf hypersurface ``epsilon = epsilon_c``."""
        return cls(beta, alpha, epsilon_critical(beta, alpha, kappa), kappa)

    @property
    def epsilon_c(self) -> float:
        return epsilon_critical(self.beta, self.alpha, self.kappa)

    @property
    def omega0(self) -> float:
        return omega0(self.beta)

    def with_epsilon(self, epsilon):
        return WgssParams(self.beta, self.alpha, epsilon, self.kappa)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional constants: ball mass ``m``, arm length ``l``, friction
    ``b``, gravity ``g``, transmission ratio ``c``, torque constant ``mu``,
    flywheel inertia ``I``, load torque ``F`` and spring constant ``k``."""

    m: float
    l: float
    b: float
    g: float
    c: float
    mu: float
    I: float
    F: float
    k: float = 0.0

    def __post_init__(self):
        for name in ("m", "l", "b", "g", "c", "mu", "I", "F"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.k < 0:
            raise ValueError("spring constant must be non-negative")
        if not self.F < self.mu:
            raise ValueError("load torque F must be smaller than mu (beta < 1)")

    @property
    def length_ratio(self) -> float:
        """``sqrt(m l / (2 k l + m g))``, the time scale of the arm motion."""
        return math.sqrt(self.m * self.l / (2 * self.k * self.l + self.m * self.g))

    def nondimensional(self) -> WgssParams:
        s = self.length_ratio
        return WgssParams(
            beta=self.F / self.mu,
            alpha=self.c * self.mu / self.I * s**2,
            epsilon=self.b / self.m * s,
            kappa=2 * self.k * self.l / (2 * self.k * self.l + self.m * self.g),
        )

    def nonuniformity(self) -> float:
        """``|d Omega_0 / dF|`` in physical units."""
        p = self.nondimensional()
        return nonuniformity(p.beta, p.kappa) / (self.c * self.mu * self.length_ratio)

    def vyshnegradskii_stable(self) -> bool:
        return self.b * self.I / self.m * self.nonuniformity() > 1.0


@dataclass(frozen=True)
class Equilibrium:
    x0: float
    y0: float
    z0: float

    @property
    def point(self) -> np.ndarray:
        return np.array([self.x0, self.y0, self.z0])


def equilibrium(params: WgssParams) -> Equilibrium:
    return Equilibrium(math.acos(params.beta), 0.0, math.sqrt(1.0 / params.beta - params.kappa))


def vector_field(state, params: WgssParams):
    x, y, z = state[0], state[1], state[2]
    sx, cx = np.sin(x), np.cos(x)
    return np.array(
        [
            y,
            (z * z + params.kappa) * sx * cx - sx - params.epsilon * y,
            params.alpha * (cx - params.beta),
        ]
    )


def pontryagin_field(state, beta, alpha, epsilon):
    """The spring-free governor in its classical form."""
    x, y, z = state[0], state[1], state[2]
    return np.array([y, z * z * np.sin(x) * np.cos(x) - np.sin(x) - epsilon * y, alpha * (np.cos(x) - beta)])


def omega0(beta) -> float:
    return math.sqrt((1.0 - beta * beta) / beta)


def epsilon_critical(beta, alpha, kappa=0.0) -> float:
    return 2.0 * alpha * beta**1.5 * math.sqrt(1.0 - kappa * beta)


def nonuniformity(beta, kappa=0.0) -> float:
    return 1.0 / (2.0 * beta**1.5 * math.sqrt(1.0 - kappa * beta))


def characteristic_coefficients(params: WgssParams) -> tuple[float, float, float]:
    """``(p1, p2, p3)`` of the monic characteristic cubic at the equilibrium."""
    w2 = omega0(params.beta) ** 2
    return params.epsilon, w2, params.epsilon_c * w2


def routh_hurwitz_stable(p1, p2, p3) -> bool:
    """All roots of ``l^3 + p1 l^2 + p2 l + p3`` in the open left half-plane."""
    return p1 > 0 and p2 > 0 and p3 > 0 and p1 * p2 > p3


def jacobian(params: WgssParams) -> np.ndarray:
    b, k = params.beta, params.kappa
    xi = 2.0 * math.sqrt(b) * math.sqrt(1.0 - b * b) * math.sqrt(1.0 - k * b)
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [-omega0(b) ** 2, -params.epsilon, xi],
            [-params.alpha * math.sqrt(1.0 - b * b), 0.0, 0.0],
        ]
    )


def g1_polynomial(beta, alpha, kappa=0.0) -> float:
    """Polynomial whose zero set on the critical hypersurface is ``l1 = 0``.

    ``l1`` has the sign of this polynomial (checked against the coefficient
    ladder and against direct integration near supercritical and subcritical
    samples).
    """
    b, a, k = beta, alpha, kappa
    a2 = a * a
    return (
        -3.0
        + 5.0 * k * b
        - (a2 - 5.0) * b**2
        + k * (a2 - 7.0) * b**3
        - 2.0 * a2 * k * k * b**4
        - (a2 * a2 - 2.0 * a2 * k * k) * b**6
        + a2 * a2 * k * b**7
    )


def l1_closed_form_sign(beta, alpha, kappa=0.0, tol=0.0) -> int:
    """Sign of ``l1`` (-1, 0 or +1) at ``epsilon = epsilon_c`` from ``G1``."""
    g = g1_polynomial(beta, alpha, kappa)
    if abs(g) <= tol:
        return 0
    return 1 if g > 0 else -1


def analytic_jet(params: WgssParams, order: int = MAX_ORDER) -> VectorFieldJet:
    """Closed-form derivatives of the field at the equilibrium, orders 1..order."""
    eq = equilibrium(params)
    x0, z0 = eq.x0, eq.z0
    zpoly = (z0 * z0 + params.kappa, 2.0 * z0, 2.0)
    entries = {}
    for r in range(1, order + 1):
        for alpha in multiplicities(3, r):
            a, b, c = alpha
            val = np.zeros(3)
            if alpha == (0, 1, 0):
                val[0] = 1.0
                val[1] = -params.epsilon
            if b == 0 and c <= 2:
                # (z^2 + kappa) * sin(2x) / 2
                val[1] += zpoly[c] * 2.0 ** (a - 1) * math.sin(2 * x0 + a * math.pi / 2)
                if c == 0:
                    val[1] -= math.sin(x0 + a * math.pi / 2)
                    if a >= 1:
                        val[2] = params.alpha * math.cos(x0 + a * math.pi / 2)
            entries[alpha] = val
    return VectorFieldJet(3, entries, max_order=order)


# parameter files -------------------------------------------------------------

PHYSICAL_KEYS = ("m", "l", "b", "g", "c", "mu", "I", "F", "k")


def params_from_mapping(data: dict, eps_critical: bool = False) -> tuple[WgssParams, str]:
    """Read nondimensional or physical parameters; returns ``(params, form)``.

    ``form`` is ``"nondimensional"`` or ``"physical"``.  With ``eps_critical``
    (or ``"epsilon": "critical"`` in the data) epsilon is replaced by its
    critical value.
    """
    if all(key in data for key in ("m", "l", "b", "g", "c", "mu", "I", "F")):
        phys = PhysicalParams(**{k: float(data[k]) for k in PHYSICAL_KEYS if k in data})
        params = phys.nondimensional()
        form = "physical"
    elif all(key in data for key in ("beta", "alpha")):
        beta, alpha = float(data["beta"]), float(data["alpha"])
        kappa = float(data.get("kappa", 0.0))
        eps = data.get("epsilon", "critical" if eps_critical else None)
        if eps is None:
            raise ValueError("epsilon missing (give a value or request the critical one)")
        if eps == "critical":
            eps = epsilon_critical(beta, alpha, kappa)
        params = WgssParams(beta, alpha, float(eps), kappa)
        form = "nondimensional"
    else:
        raise ValueError("parameter data must hold beta/alpha[/epsilon/kappa] or the nine physical constants")
    if eps_critical:
        params = params.with_epsilon(params.epsilon_c)
    return params, form


def load_params(path, eps_critical: bool = False) -> tuple[WgssParams, str]:
    return params_from_mapping(json.loads(Path(path).read_text()), eps_critical)
