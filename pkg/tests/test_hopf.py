import numpy as np
import pytest

from hopfwatt.hopf import (
    CoefficientLadder,
    DegenerateSpectrumError,
    NotHopfError,
    SequencingError,
    assemble_rhs,
    homological_residuals,
    inner,
    lyapunov_coefficients,
    make_frame,
    run_ladder,
)
from hopfwatt.jet import VectorFieldJet
from hopfwatt.wgss import WgssParams, analytic_jet

import displays
from reference_values import Q_P, Q_Q


def linear_jet(A, extra=None):
    A = np.asarray(A, float)
    n = A.shape[0]
    entries = {tuple(int(i == j) for j in range(n)): A[:, i] for i in range(n)}
    entries.update(extra or {})
    return VectorFieldJet(n, entries)


def test_frame_at_q_matches_reference_vectors(q_ladder):
    fr = q_ladder.frame
    assert np.allclose(fr.q, Q_Q, atol=5e-5)
    assert np.allclose(fr.p, Q_P, atol=5e-5)
    assert max(fr.residuals()) < 1e-12


def test_odd_resonant_terms_are_imaginary_at_q(q_ladder):
    # l1 = l2 = l3 = 0 at Q up to the rounding of its coordinates
    for m, G in [(1, q_ladder.G21), (2, q_ladder.G32), (3, q_ladder.G43)]:
        assert abs(G.real) < 1e-3 * abs(G.imag)


def test_conjugate_symmetry(q_ladder):
    for (j, k), h in q_ladder.h.items():
        assert np.allclose(h, np.conj(q_ladder.h[(k, j)]), rtol=1e-9, atol=1e-9 * np.linalg.norm(h))


def test_homological_residuals_through_order_nine(q_ladder):
    res = homological_residuals(q_ladder)
    assert {j + k for j, k in res} == set(range(2, 10))
    assert max(res.values()) < 1e-8


def test_solvability_normalisation(q_ladder):
    # resonant h_{m+1,m} carry no component along q
    p = q_ladder.frame.p
    for m in (1, 2, 3):
        assert abs(inner(p, q_ladder.h[(m + 1, m)])) < 1e-10


@pytest.mark.parametrize("c", [2.0, 0.5j, 1.3 * np.exp(0.7j)])
def test_scale_covariance(q_jet, q_ladder, c):
    scaled = run_ladder(make_frame(q_jet).rescaled(c), up_to=4)
    for m in range(1, 5):
        G, Gs = q_ladder.G[(m + 1, m)], scaled.G[(m + 1, m)]
        assert Gs == pytest.approx(abs(c) ** (2 * m) * G, rel=1e-9)


def test_unit_normalisation_keeps_signs(q_jet):
    p = WgssParams.critical(0.7, 1.2, 0.4)
    jet = analytic_jet(p)
    a = lyapunov_coefficients(jet, 4, "q1=-i")
    b = lyapunov_coefficients(jet, 4, "unit")
    assert np.array_equal(np.sign(a), np.sign(b))


def test_linear_system_has_zero_coefficients():
    lad = run_ladder(make_frame(linear_jet([[0, -1, 0], [1, 0, 0], [0, 0, -1]])), up_to=4)
    assert all(G == 0 for G in lad.G.values())
    assert lad.l == (0.0, 0.0, 0.0, 0.0)


def test_normal_form_example_recovers_cubic_coefficient():
    # x' = -y + a x (x^2 + y^2), y' = x + a y (x^2 + y^2); with |q| = 1 the
    # radius is r^2 = 2 |w|^2, so w' = i w + 2 a w |w|^2 and l1 = 2 a
    a = -0.37
    extra = {
        (3, 0): [6 * a, 0], (1, 2): [2 * a, 0], (2, 1): [0, 2 * a], (0, 3): [0, 6 * a],
    }
    jet = linear_jet([[0, -1], [1, 0]], extra)
    lad = run_ladder(make_frame(jet, "unit"), up_to=1)
    assert lad.l1 == pytest.approx(2 * a)


def test_errors():
    with pytest.raises(NotHopfError):
        make_frame(linear_jet([[-1, 0], [0, -2]]))
    with pytest.raises(DegenerateSpectrumError):
        make_frame(linear_jet([[0, -1, 0], [1, 0, 0], [0, 0, 0]]))
    with pytest.raises(ValueError):
        run_ladder(make_frame(analytic_jet(WgssParams.critical(0.5, 0.3), order=3)), up_to=2)
    fr = make_frame(analytic_jet(WgssParams.critical(0.5, 0.3)))
    with pytest.raises(SequencingError):
        assemble_rhs(fr, CoefficientLadder(fr, 4), 3, 2)


def test_display_parse_matches_enumeration():
    for (j, k), (text, _) in displays.DISPLAYS.items():
        assert displays.parse_display(text) == displays.enumerate_terms(j, k)


@pytest.mark.parametrize("key", sorted(displays.DISPLAYS))
def test_generic_expander_equals_hand_displays(q_jet, q_ladder, key):
    fr = q_ladder.frame
    j, k = key
    manual = displays.evaluate_display(q_jet, fr.q, q_ladder.h, q_ladder.G, key)
    full = assemble_rhs(fr, q_ladder, j, k)
    if displays.DISPLAYS[key][1]:
        assert np.allclose(manual, full, rtol=1e-9, atol=1e-9 * np.linalg.norm(full))
    else:
        bare = assemble_rhs(fr, q_ladder, j, k, include_transport=False)
        assert np.allclose(manual, bare, rtol=1e-9, atol=1e-9 * np.linalg.norm(bare))
        assert inner(fr.p, manual) == pytest.approx(inner(fr.p, full), rel=1e-9)
