import json

import mpmath as mp
import pytest

from cmtrace.curves import curve_model
from cmtrace.experiments import (ExperimentSpec, HypothesisError, experiment_finite,
                                 orbit_trace, trace_point)
from cmtrace.heegner import HeegnerTau, galois_orbit, heegner_form
from cmtrace.periods import lattice_distance, period_lattice
from cmtrace.quadforms import BinaryForm, kernel_classes, order_data

M49 = curve_model((1, -1, 0, -2, -1))
M121 = curve_model((0, -1, 1, -7, 10))


def test_spec_validation():
    ExperimentSpec(dK=-11, f=1, curve=M49).validate()
    with pytest.raises(ValueError):
        ExperimentSpec(dK=-11, f=1)                       # no p, no curve
    with pytest.raises(ValueError):
        ExperimentSpec(dK=-11, f=1, p=7, mode="bogus")
    with pytest.raises(HypothesisError):
        ExperimentSpec(dK=-19, f=1, curve=M49).validate()  # -19 splits at 7
    with pytest.raises(HypothesisError):
        ExperimentSpec(dK=-11, f=7, curve=M49).validate()  # f shares N
    with pytest.raises(ValueError):
        ExperimentSpec(dK=-3, f=1, p=7).validate()         # excluded discriminant
    with pytest.raises(HypothesisError):
        ExperimentSpec(dK=-11, f=1, p=9).validate()


def test_finite_report_examples():
    rep = experiment_finite(ExperimentSpec(dK=-7, f=1, p=5, mode="finite_only"))
    assert rep.all_passed and rep.fiber_count == 3 and rep.degree == 3
    rep = experiment_finite(ExperimentSpec(dK=-67, f=1, p=11, mode="finite_only"))
    assert rep.all_passed and rep.fiber_count == 6
    rep = experiment_finite(ExperimentSpec(dK=-7, f=1, p=13, mode="finite_only"))
    assert rep.all_passed and rep.fiber_count == 7
    payload = rep.to_json()
    assert payload["passed"] and payload["fiber_count"] == 7
    json.dumps(payload)


def test_trace_sign_minus_is_torsion():
    spec = ExperimentSpec(dK=-11, f=1, curve=M49, digits=40, mode="signo_minus")
    rep = trace_point(spec)
    assert rep.wp == -1
    assert rep.verdict == "torsion"
    assert rep.residual < mp.mpf(10) ** -20
    assert len(rep.orbit) == 8
    assert rep.finite_shadow.all_passed
    payload = rep.to_json()
    json.dumps(payload)
    assert payload["verdict"] == "torsion" and payload["wp"] == -1
    assert len(payload["orbit"]) == 8


def test_trace_sign_minus_second_field():
    # h(-15) = 2, so no recognition path; the torsion verdict still must hold
    spec = ExperimentSpec(dK=-15, f=1, curve=M49, digits=40, mode="signo_minus")
    rep = trace_point(spec)
    assert rep.wp == -1 and rep.verdict == "torsion"


def test_trace_sign_plus_recognized():
    spec = ExperimentSpec(dK=-67, f=1, curve=M121, digits=60, mode="main_plus")
    rep = trace_point(spec)
    assert rep.wp == 1
    assert rep.verdict == "non_torsion"
    rx, ry = rep.recognized
    assert (rx.nu, rx.mu, rx.den) == (-2, 0, 1)
    assert (ry.nu, ry.mu, ry.den) == (3, 0, 1)
    payload = rep.to_json()
    assert payload["recognized"]["x"]["nu"] == -2


def test_trace_point_requires_curve_and_mode():
    with pytest.raises(ValueError):
        trace_point(ExperimentSpec(dK=-7, f=1, p=5, mode="finite_only"))
    with pytest.raises(ValueError):
        trace_point(ExperimentSpec(dK=-7, f=1, p=5, mode="main_plus"))


def test_trace_invariant_under_base_replacement():
    order = order_data(-11, 1)
    kernel = kernel_classes(order, 7)
    digits = 40
    lat = period_lattice(M49.minimal, digits)
    base = HeegnerTau(form=heegner_form(49, -11, 7), n_level=49, dK=-11, conductor=7)
    _, tz0, _ = orbit_trace(M49, galois_orbit(base, kernel), kernel, digits)
    # translated base form (same point, shifted representative)
    f = base.form
    shifted = BinaryForm(f.a, f.b + 2 * 49, f.a + f.b + f.c)
    base2 = HeegnerTau(form=shifted, n_level=49, dK=-11, conductor=7)
    _, tz2, _ = orbit_trace(M49, galois_orbit(base2, kernel), kernel, digits)
    # a genuinely transformed Gamma_0(49) representative
    big = f.transform(1, 0, 49, 1)
    base3 = HeegnerTau(form=big, n_level=49, dK=-11, conductor=7)
    _, tz3, _ = orbit_trace(M49, galois_orbit(base3, kernel), kernel, digits)
    with mp.workdps(55):
        assert lattice_distance(lat, mp.mpc(tz2) - mp.mpc(tz0)) < mp.mpf(10) ** -20
        assert lattice_distance(lat, mp.mpc(tz3) - mp.mpc(tz0)) < mp.mpf(10) ** -20


def test_trace_orbit_sum_order_independent():
    order = order_data(-11, 1)
    kernel = kernel_classes(order, 7)
    base = HeegnerTau(form=heegner_form(49, -11, 7), n_level=49, dK=-11, conductor=7)
    orbit = galois_orbit(base, kernel)
    from cmtrace.modparam import eval_phi
    with mp.workdps(55):
        zs = [eval_phi(M49, pt.tau(40), 40) for pt in orbit]
        fwd = mp.mpc(0)
        for z in zs:
            fwd += z
        rev = mp.mpc(0)
        for z in reversed(zs):
            rev += z
        assert abs(fwd - rev) < mp.mpf(10) ** -35


def test_finite_shadow_attached_to_trace():
    spec = ExperimentSpec(dK=-11, f=1, curve=M49, digits=40, mode="signo_minus")
    rep = trace_point(spec)
    assert rep.finite_shadow.fiber_count == (7 + 1) // 2
    assert rep.finite_shadow.checks["two_to_one"]


def test_trace_level_m_four_quadratic_point():
    # N = 36 = 3^2 * 4, K = Q(sqrt(-7)): 2 splits, 3 is inert; the local sign
    # at 3 is +1 and the 4-point trace is a genuinely quadratic point
    m36 = curve_model((0, 0, 0, 0, 1))
    spec = ExperimentSpec(dK=-7, f=1, curve=m36, digits=60, mode="main_plus")
    rep = trace_point(spec)
    assert rep.wp == 1
    assert len(rep.orbit) == 4
    assert rep.verdict == "non_torsion"
    rx, ry = rep.recognized
    assert (rx.nu, rx.mu, rx.den, rx.field_disc) == (49, -13, 32, -7)
    assert (ry.nu, ry.mu, ry.den, ry.field_disc) == (215, -91, 128, -7)
    assert rep.finite_shadow.level_m == 4 and rep.finite_shadow.all_passed


def test_trace_conductor_f_three():
    spec = ExperimentSpec(dK=-11, f=3, curve=M49, digits=40, mode="signo_minus")
    rep = trace_point(spec)
    assert rep.wp == -1
    assert rep.verdict == "torsion"
    assert rep.residual < mp.mpf(10) ** -20
    assert len(rep.orbit) == 8
    for entry in rep.orbit:
        a, b, c = entry.form
        assert b * b - 4 * a * c == (7 * 3) ** 2 * -11


def test_trace_undecided_when_recognition_unavailable():
    # f = 2: the trace lives over a cubic ring class field, recognition is
    # out of scope and the run must report undecided with a non-torsion residual
    spec = ExperimentSpec(dK=-67, f=2, curve=M121, digits=40, mode="main_plus")
    rep = trace_point(spec)
    assert rep.verdict == "undecided"
    assert rep.residual > mp.mpf(10) ** -10


def test_trace_dichotomy_matched_pair_level_fifty():
    # two conductor-50 curves, same K = Q(sqrt(-23)) (2 splits, 5 inert,
    # class number 3): opposite local signs at 5, opposite verdicts
    minus = curve_model((1, 0, 1, -1, -2))
    plus = curve_model((1, 1, 1, -3, 1))
    rep_minus = trace_point(ExperimentSpec(dK=-23, f=1, curve=minus, digits=50,
                                           mode="signo_minus"))
    assert rep_minus.wp == -1
    assert rep_minus.verdict == "torsion"
    assert rep_minus.residual < mp.mpf(10) ** -25
    assert len(rep_minus.orbit) == 6
    rep_plus = trace_point(ExperimentSpec(dK=-23, f=1, curve=plus, digits=50,
                                          mode="main_plus"))
    assert rep_plus.wp == 1
    # over a class-number-three field there is no recognition path, so the
    # non-vanishing side reports undecided with a clearly nonzero residual
    assert rep_plus.verdict == "undecided"
    assert rep_plus.residual > mp.mpf(10) ** -10


def test_trace_combined_conductor_and_level_part():
    # f = 3 together with M = 2 at p = 5: the vanishing side still vanishes
    m50 = curve_model((1, 0, 1, -1, -2))
    rep = trace_point(ExperimentSpec(dK=-23, f=3, curve=m50, digits=40,
                                     mode="signo_minus"))
    assert rep.wp == -1
    assert rep.verdict == "torsion"
    assert rep.residual < mp.mpf(10) ** -20
    assert len(rep.orbit) == 6
    for entry in rep.orbit:
        a, b, c = entry.form
        assert b * b - 4 * a * c == (5 * 3) ** 2 * -23
