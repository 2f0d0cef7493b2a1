"""Degenerate Hopf loci of the governor on the critical hypersurface.

Everything here lives on ``epsilon = epsilon_c(beta, alpha, kappa)``.  The
surface ``l1 = 0`` is scanned with the closed-form sign polynomial, the curves
``l1 = l2 = 0`` are traced by Newton continuation in ``kappa`` and the point
where ``l3`` vanishes as well is found by a 3-D Newton solve.

Regions are labelled by signs: ``S``/``U`` for ``l1 < 0``/``l1 > 0`` and, on
the ``l1 = 0`` surface, ``S1``/``S2``/``U1`` by the sign of ``l2``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .hopf import lyapunov_coefficients
from .wgss import WgssParams, analytic_jet, epsilon_critical, g1_polynomial, jacobian

ZERO_TOL = 1e-6
FD_REL_STEP = 1e-5
MAX_HALVINGS = 8
GRADIENT_VARIABLES = ("beta", "kappa", "alpha")

CSV_COLUMNS = ("beta", "alpha", "kappa", "epsilon_c", "l1", "l2", "l3", "l4")

# table rows on each l1 = l2 = 0 branch, used as default continuation seeds
SEEDS = {
    "C1": dict(kappa=0.5, beta=0.71770, alpha=0.42968),
    "C2": dict(kappa=0.0, beta=0.86828, alpha=0.85050),
}
TABLE_KAPPAS = {
    "C1": (0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95),
    "C2": (0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.92, 0.98),
}
Q_SEED = dict(kappa=0.9, beta=0.93592, alpha=1.02731)


class ContinuationError(ArithmeticError):
    """Newton correction failed; ``last_good`` holds the previous curve point."""

    def __init__(self, message, last_good=None, history=None):
        super().__init__(message)
        self.last_good = last_good
        self.history = history or []


class NewtonDivergence(ArithmeticError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


class TrackingError(ArithmeticError):
    pass


def lyapunov_at(beta, alpha, kappa, up_to=4) -> np.ndarray:
    """``(l1, ..., l_up_to)`` on the critical hypersurface."""
    params = WgssParams.critical(beta, alpha, kappa)
    jet = analytic_jet(params, order=2 * up_to + 1)
    return np.array(lyapunov_coefficients(jet, up_to=up_to))


def classify_codim(l, tol=ZERO_TOL) -> int:
    """Smallest ``k`` with ``|l_k| >= tol``; ``len(l) + 1`` if all vanish."""
    for k, value in enumerate(l, start=1):
        if abs(value) >= tol:
            return k
    return len(l) + 1


@dataclass(frozen=True)
class CriticalPoint:
    beta: float
    alpha: float
    kappa: float
    l: tuple
    tol: float = ZERO_TOL

    @classmethod
    def evaluate(cls, beta, alpha, kappa, up_to=4, tol=ZERO_TOL):
        l = lyapunov_at(beta, alpha, kappa, up_to)
        return cls(float(beta), float(alpha), float(kappa), tuple(float(v) for v in l), tol)

    @property
    def epsilon_c(self) -> float:
        return epsilon_critical(self.beta, self.alpha, self.kappa)

    @property
    def codim(self) -> int:
        return classify_codim(self.l, self.tol)

    @property
    def params(self) -> WgssParams:
        return WgssParams.critical(self.beta, self.alpha, self.kappa)

    def row(self) -> list:
        ls = list(self.l) + [float("nan")] * (4 - len(self.l))
        return [self.beta, self.alpha, self.kappa, self.epsilon_c] + ls

    def as_dict(self) -> dict:
        out = dict(beta=self.beta, alpha=self.alpha, kappa=self.kappa, epsilon_c=self.epsilon_c, codim=self.codim)
        for i, v in enumerate(self.l, start=1):
            out[f"l{i}"] = v
        return out


@dataclass(frozen=True)
class TransversalityReport:
    """Gradients of ``l1..l3`` in the variables ``GRADIENT_VARIABLES``."""

    gradients: np.ndarray
    determinant: float
    crossing_speed: float
    variables: tuple = GRADIENT_VARIABLES

    @property
    def regular(self) -> bool:
        return abs(self.determinant) > 0 and self.crossing_speed != 0

    def as_dict(self) -> dict:
        return dict(
            variables=list(self.variables),
            gradients=[[float(x) for x in row] for row in self.gradients],
            determinant=float(self.determinant),
            crossing_speed=float(self.crossing_speed),
        )


def _as_vec(beta, alpha, kappa):
    return np.array([beta, kappa, alpha], dtype=float)


def _from_vec(v):
    beta, kappa, alpha = v
    return beta, alpha, kappa


def lyapunov_gradients(beta, alpha, kappa, rel_step=FD_REL_STEP, count=3) -> np.ndarray:
    """Central-difference Jacobian of ``(l1, .., l_count)`` with columns in
    ``GRADIENT_VARIABLES`` order."""
    x = _as_vec(beta, alpha, kappa)
    J = np.zeros((count, 3))
    for i in range(3):
        h = rel_step * max(abs(x[i]), 1e-3)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        J[:, i] = (lyapunov_at(*_from_vec(xp), up_to=count) - lyapunov_at(*_from_vec(xm), up_to=count)) / (2 * h)
    return J


def critical_pair(params: WgssParams) -> complex:
    """Eigenvalue of the upper critical branch (positive imaginary part)."""
    ev = np.linalg.eigvals(jacobian(params))
    upper = ev[ev.imag > 0]
    if upper.size != 1:
        raise TrackingError(f"cannot isolate a complex pair; spectrum {ev}")
    return complex(upper[0])


def crossing_speed(beta, alpha, kappa, rel_step=1e-6) -> float:
    """``d Re(lambda) / d epsilon`` at ``epsilon_c`` by central differences."""
    ec = epsilon_critical(beta, alpha, kappa)
    h = rel_step * ec
    lp = critical_pair(WgssParams(beta, alpha, ec + h, kappa))
    lm = critical_pair(WgssParams(beta, alpha, ec - h, kappa))
    if abs(lp.imag) < 1e-8 or abs(lm.imag) < 1e-8:
        raise TrackingError("critical pair collides on the real axis")
    return (lp.real - lm.real) / (2 * h)


# l1 = 0 surface ------------------------------------------------------------------


def _scan_point(args):
    beta, alpha, kappa, order = args
    g1 = g1_polynomial(beta, alpha, kappa)
    l = lyapunov_at(beta, alpha, kappa, up_to=order) if order else np.array([])
    return g1, l


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(it) for it in items]


@dataclass
class L1Scan:
    betas: np.ndarray
    alphas: np.ndarray
    kappas: np.ndarray
    g1: np.ndarray  # shape (nb, na, nk)
    l: np.ndarray  # shape (nb, na, nk, order)
    vertices: list = field(default_factory=list)
    faces: list = field(default_factory=list)

    @property
    def sign(self) -> np.ndarray:
        """Sign of ``l1`` from the closed form (0 where ``|G1| < 1e-10``)."""
        s = np.sign(self.g1)
        s[np.abs(self.g1) < 1e-10] = 0
        return s.astype(int)

    @property
    def regions(self) -> np.ndarray:
        lab = np.full(self.g1.shape, "0", dtype="<U1")
        lab[self.sign < 0] = "S"
        lab[self.sign > 0] = "U"
        return lab

    def ladder_agreement(self, min_abs_g1=1e-6) -> tuple[int, int]:
        """(agreeing, compared) counts of closed-form vs ladder sign of l1."""
        if self.l.shape[-1] == 0:
            return 0, 0
        mask = np.abs(self.g1) > min_abs_g1
        ok = np.sign(self.l[..., 0]) == self.sign
        return int(np.count_nonzero(ok & mask)), int(np.count_nonzero(mask))

    def rows(self):
        out = []
        order = self.l.shape[-1]
        for i, b in enumerate(self.betas):
            for j, a in enumerate(self.alphas):
                for k, kap in enumerate(self.kappas):
                    ls = [float(v) for v in self.l[i, j, k]] + [None] * (4 - order)
                    out.append([b, a, kap, epsilon_critical(b, a, kap), *ls, self.g1[i, j, k], self.regions[i, j, k]])
        return out

    def to_csv(self) -> str:
        return rows_to_csv(self.rows(), CSV_COLUMNS + ("G1", "region"))

    def mesh_json(self) -> dict:
        return {
            "schema": "hopfwatt.l1-mesh/1",
            "variables": ["beta", "alpha", "kappa"],
            "vertices": [[float(c) for c in v] for v in self.vertices],
            "faces": self.faces,
        }


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def scan_l1_surface(beta_range, alpha_range, kappa_range, shape, order=1, workers=None) -> L1Scan:
    """Sample the critical hypersurface on a regular grid.

    ``shape = (nb, na, nk)``.  ``G1`` gives the sign field; ``order > 0`` also
    runs the ladder up to that coefficient at every node (cross-check and CSV
    columns).  Zeros of ``G1`` along the beta direction are refined with
    Brent's method and joined into quads across neighbouring (alpha, kappa)
    columns.
    """
    nb, na, nk = (int(s) for s in shape)
    if min(nb, na, nk) < 1:
        raise ValueError("grid must have at least one node per axis")
    betas = np.linspace(*beta_range, nb) if nb > 1 else np.array([float(beta_range[0])])
    alphas = np.linspace(*alpha_range, na) if na > 1 else np.array([float(alpha_range[0])])
    kappas = np.linspace(*kappa_range, nk) if nk > 1 else np.array([float(kappa_range[0])])
    WgssParams(betas.min(), alphas.min(), 1.0, kappas.min())
    WgssParams(betas.max(), alphas.max(), 1.0, kappas.max())
    items = [(b, a, k, order) for b in betas for a in alphas for k in kappas]
    results = _map(_scan_point, items, workers)
    g1 = np.array([r[0] for r in results]).reshape(nb, na, nk)
    l = np.array([r[1] for r in results]).reshape(nb, na, nk, order)
    scan = L1Scan(betas, alphas, kappas, g1, l)
    _build_mesh(scan)
    return scan


def _build_mesh(scan: L1Scan):
    index = {}
    for j, a in enumerate(scan.alphas):
        for k, kap in enumerate(scan.kappas):
            col = scan.g1[:, j, k]
            roots = []
            for i in range(len(col) - 1):
                if col[i] == 0:
                    roots.append(scan.betas[i])
                elif col[i] * col[i + 1] < 0:
                    roots.append(brentq(g1_polynomial, scan.betas[i], scan.betas[i + 1], args=(a, kap), xtol=1e-14))
            for r, b in enumerate(roots):
                index[(j, k, r)] = len(scan.vertices)
                scan.vertices.append((float(b), float(a), float(kap)))
    for (j, k, r), v in index.items():
        quad = [v, index.get((j + 1, k, r)), index.get((j + 1, k + 1, r)), index.get((j, k + 1, r))]
        if None not in quad:
            scan.faces.append(quad)


# l1 = l2 = 0 curves ----------------------------------------------------------------


def _newton(fun, x0, tol, max_iter, rel_step=FD_REL_STEP):
    """Damped Newton with finite-difference Jacobian; returns (x, f, history)."""
    x = np.asarray(x0, dtype=float)
    f = fun(x)
    history = [float(np.max(np.abs(f)))]
    for _ in range(max_iter):
        if history[-1] < tol:
            return x, f, history
        J = np.zeros((len(f), len(x)))
        for i in range(len(x)):
            h = rel_step * max(abs(x[i]), 1e-3)
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            J[:, i] = (fun(xp) - fun(xm)) / (2 * h)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular Jacobian: {exc}", history) from exc
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = x + lam * step
            try:
                ft = fun(trial)
            except (ValueError, ArithmeticError):
                ft = None
            if ft is not None and np.max(np.abs(ft)) < history[-1]:
                break
            lam *= 0.5
        else:
            raise NewtonDivergence("no decrease after step halving", history)
        x, f = trial, ft
        history.append(float(np.max(np.abs(f))))
    if history[-1] < tol:
        return x, f, history
    raise NewtonDivergence(f"no convergence in {max_iter} iterations", history)


def curve_point(kappa, beta, alpha, tol=1e-10, max_iter=30) -> CriticalPoint:
    """Project ``(beta, alpha)`` onto ``l1 = l2 = 0`` at fixed ``kappa``."""

    def fun(x):
        return lyapunov_at(x[0], x[1], kappa, up_to=2)

    x, _, _ = _newton(fun, [beta, alpha], tol, max_iter)
    return CriticalPoint.evaluate(x[0], x[1], kappa, up_to=4)


def trace_l2_zero_curve(seed, kappas, tol=1e-10) -> list[CriticalPoint]:
    """Continue one ``l1 = l2 = 0`` branch through the given kappa values.

    ``seed`` is a mapping with ``kappa``, ``beta``, ``alpha``.  Kappa values on
    both sides of the seed are visited outward from it, with secant
    prediction from the last two accepted points.
    """
    kappas = np.sort(np.asarray(kappas, dtype=float))
    start = curve_point(seed["kappa"], seed["beta"], seed["alpha"], tol)
    found = {}
    for direction in (1, -1):
        side = kappas[kappas >= seed["kappa"]] if direction > 0 else kappas[kappas < seed["kappa"]][::-1]
        pts = [start]
        for kap in side:
            if kap == start.kappa:
                found[kap] = start
                continue
            if len(pts) >= 2:
                a, b = pts[-2], pts[-1]
                t = (kap - b.kappa) / (b.kappa - a.kappa)
                guess = (b.beta + t * (b.beta - a.beta), b.alpha + t * (b.alpha - a.alpha))
            else:
                guess = (pts[-1].beta, pts[-1].alpha)
            try:
                pt = curve_point(kap, *guess, tol=tol)
            except (NewtonDivergence, ValueError) as exc:
                raise ContinuationError(f"continuation failed at kappa={kap}: {exc}", pts[-1], getattr(exc, "history", None)) from exc
            pts.append(pt)
            found[kap] = pt
    return [found[k] for k in sorted(found)]


def trace_l2_zero_curves(kappas, seeds=None, tol=1e-10) -> dict[str, list[CriticalPoint]]:
    seeds = seeds or SEEDS
    return {name: trace_l2_zero_curve(seed, kappas, tol) for name, seed in seeds.items()}


def sign_changes(values) -> int:
    s = np.sign(np.asarray(values))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


# codimension-4 point ---------------------------------------------------------------


def find_codim4_point(seed=None, tol=1e-8, max_iter=50, rel_step=FD_REL_STEP):
    """Solve ``l1 = l2 = l3 = 0``; returns ``(CriticalPoint, TransversalityReport)``.

    Raises :class:`NewtonDivergence` (with residual history) on failure.
    """
    seed = seed or Q_SEED

    def fun(v):
        return lyapunov_at(*_from_vec(v), up_to=3)

    x, _, history = _newton(fun, _as_vec(seed["beta"], seed["alpha"], seed["kappa"]), tol, max_iter, rel_step)
    beta, alpha, kappa = _from_vec(x)
    point = CriticalPoint.evaluate(beta, alpha, kappa, up_to=4)
    grads = lyapunov_gradients(beta, alpha, kappa, rel_step)
    report = TransversalityReport(grads, float(np.linalg.det(grads)), crossing_speed(beta, alpha, kappa))
    return point, report


def l2_region(point: CriticalPoint, c1_beta: float, c2_beta: float, tol=ZERO_TOL) -> str:
    """Label of a point on the ``l1 = 0`` surface given the betas where C1 and
    C2 cross its kappa slice: S1 below C1, U1 between, S2 above C2.  Returns
    ``"C"`` on a curve (|l2| < tol)."""
    if abs(point.l[0]) > tol:
        raise ValueError("point is not on the l1 = 0 surface")
    if abs(point.l[1]) < tol:
        return "C"
    if point.beta < c1_beta:
        return "S1"
    if point.beta > c2_beta:
        return "S2"
    return "U1"


def surface_point(beta, kappa, alpha_bracket=(0.05, 3.0)):
    """Point on ``l1 = 0`` at given ``(beta, kappa)``, solving for alpha."""

    def g(a):
        return g1_polynomial(beta, a, kappa)

    grid = np.linspace(*alpha_bracket, 200)
    vals = [g(a) for a in grid]
    for i in range(len(grid) - 1):
        if vals[i] * vals[i + 1] < 0:
            alpha = brentq(g, grid[i], grid[i + 1], xtol=1e-15)
            return CriticalPoint.evaluate(beta, alpha, kappa, up_to=2)
    raise ValueError(f"no l1 = 0 crossing in alpha at beta={beta}, kappa={kappa}")


def default_workers() -> int:
    env = os.environ.get("HOPFWATT_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def curves_json(curves: dict) -> str:
    payload = {"schema": "hopfwatt.curves/1", "curves": {k: [p.as_dict() for p in v] for k, v in curves.items()}}
    return json.dumps(payload, indent=2, sort_keys=True)
