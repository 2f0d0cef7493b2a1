"""Center-manifold coefficient ladder at a Hopf equilibrium.

The center manifold is written ``x = H(w, wbar)`` with
``H = w q + wbar qbar + sum h_jk w^j wbar^k / (j! k!)`` and the reduced
equation keeps only resonant terms,

    w' = i omega0 w + sum_m G_{m+1,m} w^{m+1} wbar^m / ((m+1)! m!).

Matching coefficients of ``H_w w' + H_wbar wbar' = F(H)`` degree by degree
gives linear systems for the ``h_jk``; the right-hand sides come from
composing the Taylor jet of ``F`` with the truncated ``H`` as bivariate power
series, so no level is transcribed by hand.  The Lyapunov coefficients are
``l_m = Re G_{m+1,m} / ((m+1)! m!)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .jet import VectorFieldJet
from .series import TruncatedSeries

CONVENTIONS = ("q1=-i", "unit")
LYAPUNOV_DIVISORS = {1: 2, 2: 12, 3: 144, 4: 2880}


class HopfError(ArithmeticError):
    """Base class for failures of the Hopf analysis."""


class NotHopfError(HopfError):
    pass


class DegenerateSpectrumError(HopfError):
    pass


class ResonanceError(HopfError):
    def __init__(self, j, k, detail=""):
        self.index = (j, k)
        super().__init__(f"homological system for h_{j}{k} is singular{': ' + detail if detail else ''}")


class SequencingError(RuntimeError):
    pass


def inner(p, q) -> complex:
    """``<p, q> = sum conj(p_i) q_i``."""
    return complex(np.vdot(p, q))


@dataclass(frozen=True)
class HopfFrame:
    jet: VectorFieldJet
    omega0: float
    q: np.ndarray
    p: np.ndarray
    convention: str = "q1=-i"

    @property
    def A(self) -> np.ndarray:
        return self.jet.jacobian

    def residuals(self) -> tuple[float, float, float]:
        """Relative eigen-residuals of ``q`` and ``p`` and ``|<p,q> - 1|``."""
        A = self.A
        scale = max(1.0, np.linalg.norm(A, 2))
        rq = np.linalg.norm(A @ self.q - 1j * self.omega0 * self.q) / (scale * np.linalg.norm(self.q))
        rp = np.linalg.norm(A.T @ self.p + 1j * self.omega0 * self.p) / (scale * np.linalg.norm(self.p))
        return rq, rp, abs(inner(self.p, self.q) - 1.0)

    def rescaled(self, c: complex) -> "HopfFrame":
        """Frame with ``q -> c q`` and ``p -> p / conj(c)``."""
        return HopfFrame(self.jet, self.omega0, self.q * c, self.p / np.conj(c), f"{self.convention}*{c}")


def make_frame(jet: VectorFieldJet, normalization: str = "q1=-i", tol: float = 1e-8) -> HopfFrame:
    """Critical eigendata of the jet's Jacobian.

    ``normalization`` fixes the free complex scale of ``q``: ``"q1=-i"`` sets
    its first component to ``-i``; ``"unit"`` makes ``|q| = 1`` with the
    largest component real and positive.  Signs of the Lyapunov coefficients
    do not depend on this choice, their magnitudes do.
    """
    A = jet.jacobian
    evals, evecs = np.linalg.eig(A)
    scale = max(1.0, float(np.max(np.abs(evals))))
    on_axis = np.abs(evals.real) <= tol * scale
    upper = np.flatnonzero(on_axis & (evals.imag > tol * scale))
    if upper.size == 0:
        raise NotHopfError(f"no purely imaginary eigenvalue pair; spectrum {np.round(evals, 10)}")
    if upper.size > 1 or np.count_nonzero(on_axis) != 2:
        raise DegenerateSpectrumError(f"extra critical eigenvalues; spectrum {np.round(evals, 10)}")
    i = upper[0]
    omega0 = float(evals[i].imag)
    q = _refine_null_vector(A - 1j * omega0 * np.eye(jet.dim), evecs[:, i])
    if normalization == "q1=-i":
        if abs(q[0]) < 1e-12 * np.linalg.norm(q):
            raise ValueError("first component of q vanishes; use normalization='unit'")
        q = q * (-1j / q[0])
    elif normalization == "unit":
        q = q / np.linalg.norm(q)
        m = np.argmax(np.abs(q))
        q = q * (abs(q[m]) / q[m])
    else:
        raise ValueError(f"unknown normalization {normalization!r}; expected one of {CONVENTIONS}")
    tevals, tevecs = np.linalg.eig(A.T)
    j = int(np.argmin(np.abs(tevals + 1j * omega0)))
    p = _refine_null_vector(A.T + 1j * omega0 * np.eye(jet.dim), tevecs[:, j])
    p = p / np.conj(inner(p, q))
    return HopfFrame(jet, omega0, q, p, normalization)


def _refine_null_vector(M, v):
    # one step of inverse iteration on the (nearly) singular matrix
    try:
        w = np.linalg.solve(M + 1e-14 * np.linalg.norm(M) * np.eye(len(v)), v)
    except np.linalg.LinAlgError:
        return v
    if not np.all(np.isfinite(w)):
        return v
    return w / np.linalg.norm(w)


@dataclass
class CoefficientLadder:
    frame: HopfFrame
    up_to: int
    h: dict = field(default_factory=dict)
    G: dict = field(default_factory=dict)

    @property
    def l(self) -> tuple[float, ...]:
        return tuple(self.lyapunov(m) for m in range(1, self.up_to + 1))

    def lyapunov(self, m: int) -> float:
        return float(self.G[(m + 1, m)].real) / LYAPUNOV_DIVISORS[m]

    def __getattr__(self, name):
        # G21, G32, ..., l1, l2, ...
        if len(name) == 3 and name[0] == "G" and name[1:].isdigit():
            key = (int(name[1]), int(name[2]))
            if key in self.G:
                return self.G[key]
        if len(name) == 2 and name[0] == "l" and name[1].isdigit():
            m = int(name[1])
            if 1 <= m <= self.up_to:
                return self.lyapunov(m)
        raise AttributeError(name)

    def to_json(self, include_h: bool = True) -> dict:
        fr = self.frame
        out = {
            "schema": "hopfwatt.ladder/1",
            "normalization": fr.convention,
            "omega0": fr.omega0,
            "q": _cvec(fr.q),
            "p": _cvec(fr.p),
        }
        for (a, b), g in sorted(self.G.items()):
            out[f"G{a}{b}"] = [g.real, g.imag]
        for m in range(1, self.up_to + 1):
            out[f"l{m}"] = self.lyapunov(m)
        if include_h:
            for (j, k), v in sorted(self.h.items()):
                out[f"h_{j}{k}"] = _cvec(v)
        return out


def _cvec(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


class _Expander:
    """Holds the truncated ``H`` and reduced field and produces level RHS."""

    def __init__(self, frame: HopfFrame, degree: int):
        self.frame = frame
        self.degree = degree
        n = frame.jet.dim
        self.H = [TruncatedSeries.zeros(2, degree, dtype=complex) for _ in range(n)]
        for i in range(n):
            self.H[i].coeffs[1, 0] = frame.q[i]
            self.H[i].coeffs[0, 1] = np.conj(frame.q[i])
        self.g = TruncatedSeries.zeros(2, degree, dtype=complex)

    def set_h(self, j, k, vec):
        scale = math.factorial(j) * math.factorial(k)
        for i, comp in enumerate(self.H):
            comp.coeffs[j, k] = vec[i] / scale

    def set_G(self, m, G):
        self.g.coeffs[m + 1, m] = G / (math.factorial(m + 1) * math.factorial(m))

    def composition(self, d):
        """Degree-``d`` coefficients of ``F(H) - A H`` as an array ``[j, k, i]``."""
        jet = self.frame.jet
        n = jet.dim
        out = np.zeros((d + 1, d + 1, n), dtype=complex)
        max_r = min(d, jet.max_order)
        powers = [[None] * (max_r + 1) for _ in range(n)]
        for i in range(n):
            powers[i][0] = TruncatedSeries.constant(1.0 + 0j, 2, self.degree)
        for r in range(2, max_r + 1):
            alphas, coefs = jet.taylor_terms(r)
            for alpha, coef in zip(alphas, coefs):
                prod = None
                for i, a in enumerate(alpha):
                    if a == 0:
                        continue
                    for m in range(1, a + 1):
                        if powers[i][m] is None:
                            powers[i][m] = powers[i][m - 1] * self.H[i]
                    prod = powers[i][a] if prod is None else prod * powers[i][a]
                layer = np.array([prod.coeffs[j, d - j] for j in range(d + 1)])
                for j in range(d + 1):
                    out[j, d - j] += layer[j] * coef
        return out

    def transport(self, d):
        """Degree-``d`` coefficients of ``H_w g + H_wbar gbar`` (nonlinear part
        of the reduced field only)."""
        n = self.frame.jet.dim
        gbar = TruncatedSeries(np.conj(self.g.coeffs).T, self.degree)
        out = np.zeros((d + 1, d + 1, n), dtype=complex)
        if not np.any(self.g.coeffs):
            return out
        for i, comp in enumerate(self.H):
            t = comp.diff(0) * self.g + comp.diff(1) * gbar
            for j in range(d + 1):
                out[j, d - j, i] = t.coeffs[j, d - j]
        return out

    def rhs(self, d):
        comp = self.composition(d)
        trans = self.transport(d)
        out = {}
        for j in range(d + 1):
            k = d - j
            out[(j, k)] = math.factorial(j) * math.factorial(k) * (comp[j, k] - trans[j, k])
        return out, comp


def _solve(M, rhs, j, k):
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        raise ResonanceError(j, k, f"condition number {cond:.3g}")
    return np.linalg.solve(M, rhs)


def run_ladder(frame: HopfFrame, up_to: int = 4, imag_tol: float = 1e-9) -> CoefficientLadder:
    """Compute ``h_jk`` and ``G_{m+1,m}`` for ``m <= up_to``.

    Every ``h_jk`` with ``2 <= j + k <= 2 up_to`` is stored; at the top degree
    only ``G_{up_to+1, up_to}`` is extracted.
    """
    if not 1 <= up_to <= 4:
        raise ValueError("up_to must lie in 1..4")
    jet = frame.jet
    top = 2 * up_to + 1
    if jet.max_order < top:
        raise ValueError(f"jet of order {jet.max_order} cannot support l{up_to} (needs {top})")
    n = jet.dim
    A = jet.jacobian
    eye = np.eye(n)
    q, p, w0 = frame.q, frame.p, frame.omega0
    ladder = CoefficientLadder(frame, up_to)
    ex = _Expander(frame, top)
    for d in range(2, top + 1):
        rhs, _ = ex.rhs(d)
        for (j, k), r in rhs.items():
            if d == top and (j, k) != (up_to + 1, up_to):
                continue
            if j - k == 1:
                m = k
                G = inner(p, r)
                ladder.G[(j, k)] = G
                ex.set_G(m, G)
                if d == top:
                    continue
                M = np.zeros((n + 1, n + 1), dtype=complex)
                M[:n, :n] = 1j * w0 * eye - A
                M[:n, n] = q
                M[n, :n] = np.conj(p)
                sol = _solve(M, np.append(r - G * q, 0.0), j, k)
                h = sol[:n]
            elif k - j == 1:
                Gc = complex(p @ r)
                M = np.zeros((n + 1, n + 1), dtype=complex)
                M[:n, :n] = -1j * w0 * eye - A
                M[:n, n] = np.conj(q)
                M[n, :n] = p
                sol = _solve(M, np.append(r - Gc * np.conj(q), 0.0), j, k)
                h = sol[:n]
            elif j == k:
                size = max(np.linalg.norm(r), 1e-300)
                if np.linalg.norm(r.imag) > imag_tol * size:
                    raise HopfError(f"RHS of h_{j}{k} is not real (|Im|/|RHS| = {np.linalg.norm(r.imag) / size:.2e})")
                h = _solve(-A, r.real, j, k).astype(complex)
            else:
                h = _solve((j - k) * 1j * w0 * eye - A, r, j, k)
            ladder.h[(j, k)] = h
            ex.set_h(j, k, h)
    return ladder


def lyapunov_coefficients(jet: VectorFieldJet, up_to: int = 4, normalization: str = "q1=-i") -> tuple[float, ...]:
    return run_ladder(make_frame(jet, normalization), up_to).l


def assemble_rhs(frame: HopfFrame, ladder: CoefficientLadder, j: int, k: int, include_transport: bool = True):
    """Right-hand side of the homological equation for ``h_jk``.

    For resonant ``(m+1, m)`` this is the vector whose ``p``-projection is
    ``G_{m+1,m}``.  With ``include_transport=False`` only the composition
    ``F(H)`` part is returned (the terms generated by ``w'`` are dropped).
    """
    d = j + k
    ex = _Expander(frame, d)
    for a in range(d):
        for b in range(d - a):
            if a + b < 2:
                continue
            if (a, b) not in ladder.h:
                raise SequencingError(f"h_{a}{b} is needed before the level of h_{j}{k}")
            ex.set_h(a, b, ladder.h[(a, b)])
    for m in range(1, d):
        if 2 * m + 1 < d:
            if (m + 1, m) not in ladder.G:
                raise SequencingError(f"G_{m + 1}{m} is needed before the level of h_{j}{k}")
            ex.set_G(m, ladder.G[(m + 1, m)])
    rhs, comp = ex.rhs(d)
    if include_transport:
        return rhs[(j, k)]
    return math.factorial(j) * math.factorial(k) * comp[j, k]


def homological_residuals(ladder: CoefficientLadder) -> dict:
    """Relative residual of the invariance equation for each ``(j, k)``.

    Degrees up to ``2 up_to`` are checked in full; at the top degree only the
    solvability condition ``<p, r> = 0`` for the resonant pair can hold, and
    that scalar is reported.
    """
    frame = ladder.frame
    top = 2 * ladder.up_to + 1
    ex = _Expander(frame, top)
    for (j, k), h in ladder.h.items():
        ex.set_h(j, k, h)
    for (a, b), G in ladder.G.items():
        ex.set_G(b, G)
    A = frame.A
    w0 = frame.omega0
    out = {}
    for d in range(2, top + 1):
        comp = ex.composition(d)
        trans = ex.transport(d)
        for j in range(d + 1):
            k = d - j
            f = math.factorial(j) * math.factorial(k)
            hjk = ladder.h.get((j, k), np.zeros(frame.jet.dim, dtype=complex))
            lhs = (j - k) * 1j * w0 * hjk + f * trans[j, k]
            rhs = A @ hjk + f * comp[j, k]
            res = lhs - rhs
            scale = max(np.linalg.norm(hjk), np.linalg.norm(rhs), 1e-300)
            if d == top:
                if (j, k) == (ladder.up_to + 1, ladder.up_to):
                    out[(j, k)] = abs(inner(frame.p, res)) / scale
            else:
                out[(j, k)] = float(np.linalg.norm(res) / scale)
    return out
