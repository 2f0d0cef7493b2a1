"""Direct integration and Poincare-map analysis of the governor.

The section is the plane ``x = x0`` (the equilibrium's arm angle) crossed with
``y > 0``; points on it are written ``v = (y, z)``.  Cycles are fixed points of
the return map, bracketed by sign changes of the displacement along a family
of seeds, bisected, and polished by Newton on the two-dimensional map where
that is well conditioned.  The strongly
contracting direction (multiplier about ``exp(-epsilon T)``) is removed by a
few preliminary returns, so the displacement is measured along the slow
(center) direction only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.integrate import solve_ivp

from .wgss import WgssParams, epsilon_critical, equilibrium, jacobian

MAX_RTOL = 1e-10
CLUSTER_TOL = 1e-5


class StiffnessError(ArithmeticError):
    pass


class NoReturnError(ArithmeticError):
    """The orbit did not come back to the section within the time budget."""


def _rhs_factory(params: WgssParams, sign=1.0):
    b, a, e, k = params.beta, params.alpha, params.epsilon, params.kappa

    def rhs(t, s):
        x, y, z = s
        sx = math.sin(x)
        cx = math.cos(x)
        return [sign * y, sign * ((z * z + k) * sx * cx - sx - e * y), sign * a * (cx - b)]

    return rhs


def _domain_events():
    def low(t, s):
        return s[0]

    def high(t, s):
        return math.pi / 2 - s[0]

    def zneg(t, s):
        return s[2]

    for ev in (low, high, zneg):
        ev.terminal = True
        ev.direction = -1
    return [low, high, zneg]


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # shape (len(t), 3)
    exited: bool = False
    message: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "z"])
        for ti, s in zip(self.t, self.states):
            w.writerow([repr(float(ti))] + [repr(float(c)) for c in s])
        return buf.getvalue()


def integrate(params: WgssParams, state0, t_end, rtol=1e-10, atol=1e-12, n_out=None) -> Trajectory:
    """Integrate the governor from ``state0`` over ``[0, t_end]``.

    A trajectory that leaves ``(0, pi/2) x R x [0, inf)`` is truncated at the
    exit and flagged.  ``n_out`` equally spaced output samples (default: the
    solver's own steps).
    """
    if rtol > MAX_RTOL:
        raise ValueError(f"relative tolerance must not exceed {MAX_RTOL}")
    state0 = np.asarray(state0, dtype=float)
    if not (0 < state0[0] < math.pi / 2 and state0[2] >= 0):
        raise ValueError("initial state outside the phase domain")
    t_eval = np.linspace(0.0, t_end, n_out) if n_out else None
    sol = solve_ivp(
        _rhs_factory(params), (0.0, t_end), state0, method="DOP853", rtol=rtol, atol=atol,
        t_eval=t_eval, events=_domain_events(),
    )
    if sol.status == -1:
        raise StiffnessError(sol.message)
    exited = sol.status == 1
    return Trajectory(sol.t, sol.y.T, exited, "left the phase domain" if exited else "")


def divergence(params: WgssParams) -> float:
    """Trace of the Jacobian of the field; constant in state."""
    return -params.epsilon


def volume_ratio(params: WgssParams, state0, t_end=10.0, rtol=1e-10) -> float:
    """``det`` of the variational matrix after ``t_end`` divided by
    ``exp(-epsilon t_end)``; equals 1 by Liouville's formula."""
    a, e, k = params.alpha, params.epsilon, params.kappa
    f = _rhs_factory(params)

    def rhs(t, s):
        x, y, z = s[:3]
        sx, cx = math.sin(x), math.cos(x)
        J = np.array(
            [
                [0.0, 1.0, 0.0],
                [(z * z + k) * (cx * cx - sx * sx) - cx, -e, 2 * z * sx * cx],
                [-a * sx, 0.0, 0.0],
            ]
        )
        Phi = s[3:].reshape(3, 3)
        return np.concatenate([f(t, s[:3]), (J @ Phi).ravel()])

    s0 = np.concatenate([np.asarray(state0, float), np.eye(3).ravel()])
    sol = solve_ivp(rhs, (0, t_end), s0, method="DOP853", rtol=rtol, atol=1e-12)
    return float(np.linalg.det(sol.y[3:, -1].reshape(3, 3)) / math.exp(-params.epsilon * t_end))


# return map ----------------------------------------------------------------------


class ReturnMap:
    """First return to ``x = x0, y > 0``; ``time_direction=-1`` follows the
    flow backwards."""

    def __init__(self, params: WgssParams, rtol=1e-12, atol=1e-14, t_max=None, time_direction=1):
        if rtol > MAX_RTOL:
            raise ValueError(f"relative tolerance must not exceed {MAX_RTOL}")
        self.params = params
        self.eq = equilibrium(params)
        self.rtol, self.atol = rtol, atol
        self.direction = 1 if time_direction >= 0 else -1
        w = math.sqrt(max((1 - params.beta**2) / params.beta, 1e-12))
        self.t_max = t_max or 50 * 2 * math.pi / w
        self._rhs = _rhs_factory(params, float(self.direction))
        self.calls = 0

    def _leg(self, state, direction):
        x0 = self.eq.x0

        def cross(t, s):
            return s[0] - x0

        cross.terminal = True
        cross.direction = direction
        sol = solve_ivp(
            self._rhs, (0.0, self.t_max), state, method="DOP853", rtol=self.rtol, atol=self.atol,
            events=[cross] + _domain_events(),
        )
        if sol.status == -1:
            raise StiffnessError(sol.message)
        if not len(sol.t_events[0]):
            raise NoReturnError("no section crossing" + (" (left the phase domain)" if sol.status == 1 else ""))
        return sol.y_events[0][0], sol.t_events[0][0]

    def __call__(self, v):
        """``(v_next, return_time)`` for ``v = (y, z)``."""
        self.calls += 1
        state = np.array([self.eq.x0, v[0], v[1]])
        # forward: first cross downwards (y < 0), then upwards; reversed for backward time
        s1, t1 = self._leg(state, -self.direction)
        s2, t2 = self._leg(s1, self.direction)
        return np.array([s2[1], s2[2]]), t1 + t2

    def jacobian(self, v, step=1e-6):
        J = np.zeros((2, 2))
        for i in range(2):
            h = step * max(1.0, abs(v[i]))
            vp, vm = np.array(v, float), np.array(v, float)
            vp[i] += h
            vm[i] -= h
            J[:, i] = (self(vp)[0] - self(vm)[0]) / (2 * h)
        return J

    def fixed_point(self, v, tol=1e-12, max_iter=20, step=1e-6):
        """Newton on ``R(v) - v``; returns ``(v, period, jacobian)``."""
        v = np.array(v, dtype=float)
        for _ in range(max_iter):
            rv, T = self(v)
            res = rv - v
            J = self.jacobian(v, step)
            dv = np.linalg.solve(J - np.eye(2), -res)
            v = v + dv
            if v[0] <= 0:
                raise NoReturnError("Newton left the half-section y > 0")
            if np.max(np.abs(dv)) < tol * max(1.0, np.max(np.abs(v))):
                break
        else:
            raise ArithmeticError("return-map Newton did not converge")
        rv, T = self(v)
        return v, T, self.jacobian(v, step)


def center_direction(params: WgssParams) -> np.ndarray:
    """``(dy, dz)`` tangent of the linear center-like eigenspace on the section."""
    A = jacobian(params)
    ev, vecs = np.linalg.eig(A)
    i = int(np.argmax(ev.imag))
    v = vecs[:, i]
    v = v * (-1j / v[0])
    re = v.real
    return np.array([1.0, re[2] / re[1]])


def _projection_returns(params, max_returns=8):
    # enough returns for exp(-epsilon T)^n < 1e-10
    w = math.sqrt((1 - params.beta**2) / params.beta)
    strong = math.exp(-params.epsilon * 2 * math.pi / w)
    if strong <= 0:
        return 1
    return int(min(max_returns, max(1, math.ceil(math.log(1e-10) / math.log(strong)))))


class SlowCurve:
    """Section points after the strong direction has collapsed.

    ``point(y)`` starts on the linear center direction (or on a chord between
    two known slow points) and applies ``n_proj`` returns; ``displacement(v)``
    is the change of ``y`` over one further return.
    """

    def __init__(self, R: ReturnMap, n_proj=None):
        self.R = R
        self.eq = R.eq
        self.n_proj = n_proj if n_proj is not None else _projection_returns(R.params)
        self.tangent = center_direction(R.params)

    def point(self, y, chord=None):
        if chord is None:
            v = np.array([y, self.eq.z0 + self.tangent[1] * y])
        else:
            va, vb = chord
            t = (y - va[0]) / (vb[0] - va[0])
            v = np.array([y, va[1] + t * (vb[1] - va[1])])
        for _ in range(max(1, self.n_proj)):
            v, _ = self.R(v)
        return v

    def displacement(self, v):
        rv, _ = self.R(v)
        return rv[0] - v[0]


@dataclass
class CycleRecord:
    amplitude: float  # y on the section
    period: float
    stable: bool
    multipliers: tuple  # (slow, strong)
    section_point: tuple
    x_range: float = float("nan")

    def as_dict(self) -> dict:
        return dict(
            amplitude=self.amplitude,
            period=self.period,
            stable=self.stable,
            multipliers=[float(np.real(m)) for m in self.multipliers],
            section_point=list(self.section_point),
            x_range=self.x_range,
        )


@dataclass
class OrbitCensus:
    params: WgssParams
    equilibrium_stable: bool
    cycles: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    inconclusive: bool = False
    notes: list = field(default_factory=list)

    @property
    def stable_cycles(self):
        return [c for c in self.cycles if c.stable]

    @property
    def unstable_cycles(self):
        return [c for c in self.cycles if not c.stable]

    @property
    def stable_attractors(self) -> int:
        return len(self.stable_cycles) + int(self.equilibrium_stable)

    def as_dict(self) -> dict:
        return {
            "schema": "hopfwatt.census/1",
            "params": {k: float(v) for k, v in self.params.as_dict().items()},
            "equilibrium": {
                "point": [float(c) for c in equilibrium(self.params).point],
                "stability": "stable" if self.equilibrium_stable else "unstable",
            },
            "cycles": [c.as_dict() for c in self.cycles],
            "seeds": {"section": "x = x0, y > 0", "amplitudes": [float(a) for a in self.seeds]},
            "inconclusive": self.inconclusive,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def equilibrium_is_stable(params: WgssParams) -> bool:
    return bool(np.all(np.linalg.eigvals(jacobian(params)).real < 0))


def _bisect(curve: SlowCurve, va, vb, da, tol=1e-12, iters=60):
    lo, hi, dlo = va, vb, da
    for _ in range(iters):
        if hi[0] - lo[0] < tol * max(1.0, hi[0]):
            break
        mid = curve.point(0.5 * (lo[0] + hi[0]), chord=(lo, hi))
        if not lo[0] < mid[0] < hi[0]:
            break
        dm = curve.displacement(mid)
        if dm == 0:
            return mid, mid, mid
        if dm * dlo < 0:
            hi = mid
        else:
            lo, dlo = mid, dm
    t = 0.5
    return lo + t * (hi - lo), lo, hi


def _slow_multiplier(curve: SlowCurve, v, va, vb):
    """``1 + d(displacement)/dy`` along the slow curve at ``v``."""
    h = min(1e-3 * max(v[0], 1e-3), 0.25 * (vb[0] - va[0]) if vb[0] > va[0] else 1e-6)
    h = max(h, 1e-7)
    chord = (va, vb) if vb[0] - va[0] > 4 * h else (v - np.array([1.0, curve.tangent[1]]), v + np.array([1.0, curve.tangent[1]]))
    vp = curve.point(v[0] + h, chord=chord)
    vm = curve.point(v[0] - h, chord=chord)
    return 1.0 + (curve.displacement(vp) - curve.displacement(vm)) / (vp[0] - vm[0])


def _cycle_x_range(params, v, T, rtol):
    eq = equilibrium(params)
    tr = integrate(params, [eq.x0, v[0], v[1]], T, rtol=min(rtol, MAX_RTOL), n_out=400)
    return float(np.ptp(tr.states[:, 0]))


def poincare_census(
    params: WgssParams,
    amplitudes=None,
    amp_range=(1e-3, 0.6),
    n_seeds=24,
    rtol=1e-12,
    cluster_tol=CLUSTER_TOL,
    project_returns=None,
) -> OrbitCensus:
    """Inventory of the equilibrium and small cycles at ``params``.

    Seeds are section points ``(y, z)`` displaced from the equilibrium along
    the linear center direction with ``y`` in ``amplitudes`` (log-spaced over
    ``amp_range`` by default).  Each seed is projected onto the slow curve; a
    sign change of the displacement between neighbouring seeds brackets a
    cycle, which is bisected and, when the return map is well conditioned,
    polished by Newton.  The slow multiplier is ``1 +`` the displacement slope
    along the slow curve, the strong one comes from the 2-D map Jacobian.
    """
    if amplitudes is None:
        amplitudes = np.geomspace(amp_range[0], amp_range[1], n_seeds)
    amplitudes = np.sort(np.asarray(amplitudes, dtype=float))
    census = OrbitCensus(params, equilibrium_is_stable(params), seeds=list(amplitudes))
    R = ReturnMap(params, rtol=rtol)
    curve = SlowCurve(R, project_returns)

    samples = []
    positive = amplitudes[amplitudes > 0]
    if positive.size < amplitudes.size:
        census.notes.append("seeds at the equilibrium skipped")
    if positive.size == 0:
        return census
    for a in positive:
        try:
            v = curve.point(a)
            if v[0] <= 0:
                continue
            samples.append((v, curve.displacement(v)))
        except NoReturnError:
            census.notes.append(f"seed y={a:.6g}: no return")
    if len(samples) < 2:
        census.inconclusive = True
        return census
    samples.sort(key=lambda s: s[0][0])

    found = []
    for (va, da), (vb, db) in zip(samples[:-1], samples[1:]):
        if not (da == 0 or da * db < 0) or vb[0] <= va[0]:
            continue
        try:
            v, lo, hi = _bisect(curve, va, vb, da)
            mu_slow = _slow_multiplier(curve, v, va, vb)
            if abs(mu_slow - 1) > 1e-5:
                try:
                    vn, _, _ = R.fixed_point(v)
                    if va[0] <= vn[0] <= vb[0]:
                        v = vn
                except (ArithmeticError, np.linalg.LinAlgError):
                    pass
            _, T = R(v)
            ev = np.linalg.eigvals(R.jacobian(v, step=1e-5))
            mu_strong = float(np.real(ev[np.argmin(np.abs(ev))]))
        except NoReturnError as exc:
            census.notes.append(f"bracket [{va[0]:.6g}, {vb[0]:.6g}]: {exc}")
            continue
        stable = abs(mu_slow) < 1 and abs(mu_strong) < 1
        found.append(CycleRecord(float(v[0]), float(T), bool(stable), (float(mu_slow), mu_strong), (float(v[0]), float(v[1]))))

    cycles = []
    for c in sorted(found, key=lambda c: c.amplitude):
        if cycles and abs(c.amplitude - cycles[-1].amplitude) < cluster_tol:
            continue
        cycles.append(c)
    for c in cycles:
        c.x_range = _cycle_x_range(params, c.section_point, c.period, rtol)
    census.cycles = cycles
    return census


def restart_attracts(params: WgssParams, cycle: CycleRecord, kick=1e-4, returns=3, rtol=1e-12) -> bool:
    """Kick the cycle's section point off the slow curve and check the
    restart comes back closer than it started."""
    R = ReturnMap(params, rtol=rtol)
    v0 = np.asarray(cycle.section_point, dtype=float)
    v = v0 + np.array([0.0, kick])
    for _ in range(returns):
        v, _ = R(v)
    return bool(np.linalg.norm(v - v0) < kick)


def reverse_time_cycle(params: WgssParams, seed, rtol=1e-12, step=1e-10):
    """Locate a cycle as a fixed point of the backward-time return map.

    Plain backward iteration is useless here: the strongly contracting
    direction becomes strongly expanding.  Newton on the backward map converges
    regardless.  Returns ``(v, period, multipliers)`` of the backward map; a
    forward-unstable cycle has its slow multiplier inside the unit circle.
    """
    R = ReturnMap(params, rtol=rtol, time_direction=-1)
    v, T, J = R.fixed_point(seed, step=step)
    return v, T, tuple(np.linalg.eigvals(J))


def amplitude_scaling(params_at, distances, **census_kw):
    """Fit ``amplitude ~ C * d**p`` over distances ``d`` from criticality;
    ``params_at(d)`` returns the parameters.  Returns ``(p, amplitudes)``
    using the largest stable cycle at each distance."""
    amps = []
    for d in distances:
        c = poincare_census(params_at(d), **census_kw)
        if not c.stable_cycles:
            raise ArithmeticError(f"no stable cycle at distance {d}")
        amps.append(max(s.amplitude for s in c.stable_cycles))
    p, _ = np.polyfit(np.log(distances), np.log(amps), 1)
    return float(p), amps


# multi-attractor search ------------------------------------------------------------


def radial_targets(roots, l4):
    """``(eta, l1, l2, l3)`` making ``eta + l1 u + ... + l4 u^4`` vanish at ``roots``."""
    c = np.poly(np.asarray(roots, dtype=float))
    return l4 * c[4], l4 * c[3], l4 * c[2], l4 * c[1]


@dataclass
class TongueResult:
    params: WgssParams
    census: OrbitCensus
    target_amplitudes: tuple
    history: list

    def as_dict(self) -> dict:
        return dict(
            params={k: float(v) for k, v in self.params.as_dict().items()},
            target_amplitudes=[float(a) for a in self.target_amplitudes],
            newton_residuals=[float(r) for r in self.history],
            census=self.census.as_dict(),
        )


def find_tongue(l3_target=0.06, spacing=(1.0, 2.0, 3.0, 4.0), seed=None, rtol=1e-12, max_iter=12):
    """Parameters with a stable equilibrium and two stable cycles near the
    codimension-4 point.

    With ``l4 < 0`` the truncated radial equation
    ``r' = r (eta + l1 r^2 + l2 r^4 + l3 r^6 + l4 r^8)`` has four positive
    roots in ``u = r^2`` (alternately unstable/stable, the equilibrium being
    stable) only when ``l3 > 0``, ``l2 < 0``, ``l1 > 0``, ``eta < 0``.  The
    roots ``u_i = s * spacing_i`` are sized so that ``l3 = l3_target``; the
    resulting coefficient targets give a first guess, which is corrected by
    Newton in ``(beta, kappa, alpha, epsilon)`` so that the measured slow
    displacement vanishes at the four predicted section amplitudes.
    """
    from . import locus

    seed = seed or locus.Q_SEED
    q, _ = locus.find_codim4_point(seed)
    # l4 changes quickly away from Q; extrapolate it along the l3 direction
    g = locus.lyapunov_gradients(q.beta, q.alpha, q.kappa, count=4)
    dl4_dl3 = float(g[3] @ np.linalg.lstsq(g[:3], np.array([0.0, 0.0, 1.0]), rcond=None)[0])
    l4 = q.l[3] + dl4_dl3 * l3_target
    if l4 >= 0:
        raise ValueError(f"l3_target={l3_target} too large: extrapolated l4 = {l4:.3g} is not negative")
    spacing = np.asarray(spacing, dtype=float)
    s = l3_target / (-l4 * spacing.sum())
    u = s * spacing
    eta, l1, l2, l3 = radial_targets(u, l4)
    target = np.array([l1, l2, l3])

    def coeffs(v):
        return locus.lyapunov_at(*locus._from_vec(v), up_to=3) - target

    x, _, _ = locus._newton(coeffs, locus._as_vec(q.beta, q.alpha, q.kappa), 1e-13, 30)
    beta, alpha, kappa = locus._from_vec(x)
    ec = epsilon_critical(beta, alpha, kappa)
    w2 = (1 - beta * beta) / beta
    eps = ec + eta / crossing_rate(w2, ec)
    ys = 2 * math.sqrt(w2) * np.sqrt(u)

    def residual(th):
        p = WgssParams(th[0], th[2], th[3], th[1])
        curve = SlowCurve(ReturnMap(p, rtol=rtol))
        out = []
        for y in ys:
            v = curve.point(y)
            out.append(curve.displacement(v) / v[0])
        return np.array(out)

    th = np.array([beta, kappa, alpha, eps])
    history = []
    for _ in range(max_iter):
        f = residual(th)
        history.append(float(np.max(np.abs(f))))
        if history[-1] < 1e-13:
            break
        J = np.zeros((4, 4))
        for i in range(4):
            h = 1e-7 * abs(th[i])
            tp, tm = th.copy(), th.copy()
            tp[i] += h
            tm[i] -= h
            J[:, i] = (residual(tp) - residual(tm)) / (2 * h)
        th = th + np.linalg.solve(J, -f)
    params = WgssParams(th[0], th[2], th[3], th[1])
    lo, hi = 0.4 * ys[0], 1.3 * ys[-1]
    census = poincare_census(params, amplitudes=np.linspace(lo, hi, 40), rtol=rtol)
    return TongueResult(params, census, tuple(ys), history)


def crossing_rate(omega0_sq, eps_c):
    """Closed-form ``d Re(lambda)/d epsilon`` at criticality."""
    return -omega0_sq / (2.0 * (omega0_sq + eps_c**2))


def representatives() -> dict:
    """Recorded parameter points (supercritical and subcritical samples, the
    H representative and the tongue point)."""
    text = resources.files("hopfwatt").joinpath("data/representatives.json").read_text()
    return json.loads(text)


def representative_params(name: str) -> WgssParams:
    r = representatives()[name]
    return WgssParams(r["beta"], r["alpha"], r["epsilon"], r["kappa"])
