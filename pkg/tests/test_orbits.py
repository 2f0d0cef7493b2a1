import json

import numpy as np
import pytest

from hopfwatt import orbits
from hopfwatt.wgss import WgssParams, equilibrium


@pytest.fixture(scope="module")
def supercritical():
    return orbits.representative_params("H1_supercritical")


@pytest.fixture(scope="module")
def subcritical():
    return orbits.representative_params("subcritical")


@pytest.fixture(scope="module")
def super_census(supercritical):
    return orbits.poincare_census(supercritical)


@pytest.fixture(scope="module")
def sub_census(subcritical):
    return orbits.poincare_census(subcritical)


def test_equilibrium_start_does_not_drift(supercritical):
    eq = equilibrium(supercritical).point
    tr = orbits.integrate(supercritical, eq, 1e3)
    assert np.max(np.linalg.norm(tr.states - eq, axis=1)) < 1e-9


def test_overdamped_perturbation_decays():
    p = WgssParams.critical(0.6, 0.8, 0.3)
    p = p.with_epsilon(1.2 * p.epsilon)
    eq = equilibrium(p).point
    tr = orbits.integrate(p, eq + [1e-2, 0, 0], 400.0)
    assert np.linalg.norm(tr.states[-1] - eq) < 1e-4


def test_underdamped_supercritical_converges_to_cycle(supercritical, super_census):
    eq = equilibrium(supercritical).point
    tr = orbits.integrate(supercritical, eq + [0.01, 0, 0], 3000.0, n_out=30001)
    # the slow multiplier is about 0.977, so 300+ periods land within 1e-3
    tail = tr.states[-3000:, 0]
    assert np.ptp(tail) == pytest.approx(super_census.cycles[0].x_range, rel=5e-3)


def test_divergence_and_volume_contraction(supercritical):
    assert orbits.divergence(supercritical) == -supercritical.epsilon
    eq = equilibrium(supercritical).point
    assert orbits.volume_ratio(supercritical, eq + [0.05, 0.02, -0.01], t_end=10.0) == pytest.approx(1.0, rel=1e-2)


def test_domain_exit_and_validation(supercritical):
    tr = orbits.integrate(supercritical, [1.4, 5.0, 1.0], 50.0)
    assert tr.exited and tr.t[-1] < 50.0
    with pytest.raises(ValueError):
        orbits.integrate(supercritical, [1.0, 0.0, 1.0], 1.0, rtol=1e-6)
    with pytest.raises(ValueError):
        orbits.integrate(supercritical, [2.0, 0.0, 1.0], 1.0)


def test_supercritical_census(super_census):
    c = super_census
    assert not c.equilibrium_stable
    assert len(c.cycles) == 1 and c.cycles[0].stable
    assert c.cycles[0].period > 0


def test_stable_cycle_attracts_restart(supercritical, super_census):
    assert orbits.restart_attracts(supercritical, super_census.cycles[0])


def test_subcritical_census(sub_census):
    c = sub_census
    assert c.equilibrium_stable
    assert len(c.cycles) == 1 and not c.cycles[0].stable


def test_reverse_time_confirms_unstable_cycle(subcritical, sub_census):
    cyc = sub_census.cycles[0]
    v, T, mults = orbits.reverse_time_cycle(subcritical, cyc.section_point)
    assert np.allclose(v, cyc.section_point, atol=1e-8)
    assert T == pytest.approx(cyc.period, rel=1e-8)
    slow = min(mults, key=lambda m: abs(abs(m) - 1))
    assert abs(slow) < 1
    assert abs(slow) == pytest.approx(1 / cyc.multipliers[0], rel=1e-3)


def test_flags_agree_with_multipliers(super_census, sub_census):
    for c in super_census.cycles + sub_census.cycles:
        assert c.stable == (max(abs(m) for m in c.multipliers) < 1)


def test_census_json(sub_census):
    d = json.loads(sub_census.to_json())
    assert d["schema"] == "hopfwatt.census/1"
    assert d["equilibrium"]["stability"] == "stable"
    assert d["cycles"][0]["stable"] is False


def test_escaping_seeds_mark_census_inconclusive(subcritical):
    c = orbits.poincare_census(subcritical, amplitudes=[0.2, 0.3])
    assert c.inconclusive and not c.cycles and c.notes


def test_equilibrium_seed_gives_no_cycles(supercritical):
    c = orbits.poincare_census(supercritical, amplitudes=[0.0])
    assert c.cycles == [] and not c.inconclusive


def test_radial_targets_have_requested_roots():
    u = np.array([1.0, 2.0, 3.0, 4.0]) * 1e-3
    eta, l1, l2, l3 = orbits.radial_targets(u, -2.0)
    poly = [-2.0, l3, l2, l1, eta]
    assert np.allclose(np.sort(np.roots(poly).real), u)
    assert eta < 0 < l1 and l2 < 0 < l3


def test_crossing_rate_matches_eigenvalues():
    p = WgssParams.critical(0.6, 0.8, 0.3)
    h = 1e-6
    from hopfwatt.wgss import jacobian

    def re(e):
        ev = np.linalg.eigvals(jacobian(p.with_epsilon(e)))
        return ev[np.argmax(ev.imag)].real

    fd = (re(p.epsilon + h) - re(p.epsilon - h)) / (2 * h)
    assert orbits.crossing_rate(p.omega0**2, p.epsilon) == pytest.approx(fd, rel=1e-6)


def test_representatives_file():
    reps = orbits.representatives()
    assert reps["schema"] == "hopfwatt.representatives/1"
    assert reps["H1_supercritical"]["l1"] < 0 < reps["subcritical"]["l1"]
    t = reps["tongue"]
    assert t["epsilon"] > WgssParams(t["beta"], t["alpha"], t["epsilon"], t["kappa"]).epsilon_c
