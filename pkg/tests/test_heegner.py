import mpmath as mp
import pytest

from cmtrace.fp import legendre
from cmtrace.heegner import (HeegnerTau, NoHeegnerPoint, galois_orbit, gamma0_reduce,
                             heegner_form)
from cmtrace.quadforms import (BinaryForm, compose, kernel_classes,
                               order_data, reduce_form)


def brute_stratum_minimum(n_level, dK, c, p):
    """Oracle: scan all B with B^2 = c^2 dK mod 4N and p^2 | B, pick min |B|."""
    disc = c * c * dK
    best = None
    for b in range(-2 * n_level, 2 * n_level + 1):
        if (b * b - disc) % (4 * n_level):
            continue
        if p and b % (p * p):
            continue
        cand = BinaryForm(n_level, b, (b * b - disc) // (4 * n_level))
        if not cand.is_primitive():
            continue
        if best is None or (abs(cand.b), -cand.b) < (abs(best.b), -best.b):
            best = cand
    return best


def test_heegner_form_examples():
    f = heegner_form(49, -11, 7)
    assert f == BinaryForm(49, 49, 15)
    assert f.disc() == -539 and f.b % 49 == 0
    assert f == brute_stratum_minimum(49, -11, 7, 7)
    f2 = heegner_form(121, -67, 11)
    assert f2 == BinaryForm(121, 121, 47)
    assert f2 == brute_stratum_minimum(121, -67, 11, 11)


def test_conductor_one_obstruction():
    with pytest.raises(NoHeegnerPoint):
        heegner_form(49, -11, 1)
    # sanity: -11 is a non-residue mod 7
    assert legendre(-11 % 7, 7) == -1
    heegner_form(49, -11, 7)                 # succeeds


def test_heegner_form_classical_level():
    # coprime level: N = 11, dK = -7 (both primes split), conductor 1
    f = heegner_form(11, -7, 1)
    assert f.a == 11 and f.disc() == -7


def test_heegner_tau():
    ht = HeegnerTau(form=BinaryForm(49, 49, 15), n_level=49, dK=-11, conductor=7)
    tau = ht.tau(40)
    with mp.workdps(50):
        assert mp.im(tau) > 0
        val = 49 * tau ** 2 + 49 * tau + 15
        assert abs(val) < mp.mpf(10) ** -35
    with pytest.raises(ValueError):
        HeegnerTau(form=BinaryForm(7, 7, 21), n_level=49, dK=-11, conductor=7)


def test_gamma0_reduce():
    base = BinaryForm(49, 49, 15)
    big = base.transform(1, 0, 49, 1)         # a Gamma_0(49) translate, huge A
    assert big.a != base.a
    red = gamma0_reduce(big, 49)
    assert red.a % 49 == 0
    assert reduce_form(red) == reduce_form(base)
    assert red.a <= big.a
    assert -red.a < red.b <= red.a


def orbit_setup(dK, p, ai_level):
    order = order_data(dK, 1)
    kernel = kernel_classes(order, p)
    base = HeegnerTau(form=heegner_form(ai_level, dK, p), n_level=ai_level,
                      dK=dK, conductor=p)
    return order, kernel, base


def test_orbit_size_and_base_membership():
    order, kernel, base = orbit_setup(-11, 7, 49)
    orbit = galois_orbit(base, kernel)
    assert len(orbit) == 8
    # identity class reproduces the base point
    assert reduce_form(orbit[0].form) == reduce_form(base.form)
    assert orbit[0].form == gamma0_reduce(base.form, 49)
    # distinct ideal classes
    assert len({reduce_form(pt.form) for pt in orbit}) == 8


def test_orbit_classes_are_base_times_kernel():
    order, kernel, base = orbit_setup(-11, 7, 49)
    orbit = galois_orbit(base, kernel)
    base_class = reduce_form(base.form)
    got = {reduce_form(pt.form) for pt in orbit}
    expected = {reduce_form(compose(base_class, kc.form)) for kc in kernel.classes}
    assert got == expected


def test_orbit_stable_under_rebasing():
    order, kernel, base = orbit_setup(-11, 7, 49)
    orbit = galois_orbit(base, kernel)
    first = {pt.form for pt in orbit}
    again = {pt.form for pt in galois_orbit(orbit[3], kernel)}
    assert first == again


def test_acting_twice_equals_squared_class():
    from cmtrace.projline import proj_mul
    from cmtrace.quadforms import proj_params
    order, kernel, base = orbit_setup(-11, 7, 49)
    params = proj_params(order, 7)
    orbit = galois_orbit(base, kernel)
    index_of = {kc.proj: i for i, kc in enumerate(kernel.classes)}
    # acting twice by the class at idx = acting once by its square
    for idx in (1, 2, 4):
        sq = index_of[proj_mul(params, kernel.classes[idx].proj, kernel.classes[idx].proj)]
        twice = galois_orbit(orbit[idx], kernel)[idx]
        assert reduce_form(twice.form) == reduce_form(orbit[sq].form)


def test_orbit_121():
    order, kernel, base = orbit_setup(-67, 11, 121)
    orbit = galois_orbit(base, kernel)
    assert len(orbit) == 12
    assert len({reduce_form(pt.form) for pt in orbit}) == 12
    for pt in orbit:
        assert pt.form.a % 121 == 0
        with mp.workdps(40):
            assert mp.im(pt.tau(30)) > mp.mpf("0.003")


def test_orbit_rejects_mismatched_kernel():
    order = order_data(-11, 1)
    kernel = kernel_classes(order, 7)
    base = HeegnerTau(form=heegner_form(121, -67, 11), n_level=121, dK=-67, conductor=11)
    with pytest.raises(ValueError):
        galois_orbit(base, kernel)


def test_heegner_form_composite_level():
    # N = 36, c = 3: stratum 9 | B at the distinguished prime 3
    f = heegner_form(36, -7, 3)
    assert f == BinaryForm(36, 9, 1)
    assert f.b % 9 == 0 and f.disc() == -63
