"""Heegner forms of level N and the Galois orbit of a CM point of conductor p*f.

A CM point of discriminant D = c^2 dK on X_0(N) is carried by a primitive
form (A, B, C) with N | A and B^2 = D mod 4N, with representative
tau = (-B + sqrt(D)) / (2A) in the upper half plane; equivalently by the pair
of lattices  L1 = <A, (-B + sqrt(D))/2>  and its index-N cyclic sublattice
L2 = <A, N(-B + sqrt(D))/2>, both proper modules over the order of that
discriminant.

The Galois group of the ring class field acts through ideal multiplication on
the lattice pair (main theorem of complex multiplication), so the orbit under
Gal(H_pf / H_f) is computed exactly: multiply both lattices by each kernel
ideal, re-read the cyclic pair through a Smith-adapted basis, and take the
basis ratio as the new point.  Everything stays in integer arithmetic; the
resulting N-divisible forms are finally reduced inside their Gamma_0(N) class
to keep imaginary parts workable for the q-series.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import mpmath as mp
from sympy import factorint
from sympy.ntheory import sqrt_mod

from .quadforms import (BinaryForm, GaloisKernel, form_to_ideal, ideal_mul,
                        lattice_intersect)


class NoHeegnerPoint(ValueError):
    """The discriminant admits no form with N | A (square-root obstruction)."""


@dataclass(frozen=True)
class HeegnerTau:
    """CM point data: an N-divisible form with its level and discriminant split."""

    form: BinaryForm
    n_level: int
    dK: int
    conductor: int

    def __post_init__(self):
        if self.form.a % self.n_level:
            raise ValueError("leading coefficient must be divisible by N")
        if self.form.disc() != self.conductor ** 2 * self.dK:
            raise ValueError("discriminant mismatch")

    def tau(self, digits: int):
        """Upper half plane representative at the requested precision."""
        with mp.workdps(digits + 15):
            d = self.form.disc()
            return (-self.form.b + mp.sqrt(mp.mpc(d))) / (2 * self.form.a)


def heegner_form(n_level: int, dK: int, c: int) -> BinaryForm:
    """Deterministic smallest-|B| primitive form (N, B, C) with B^2 = c^2 dK mod 4N.

    Raises NoHeegnerPoint when the congruence is unsolvable, which is exactly
    the classical obstruction (for instance conductor 1 at an inert prime).

    At a prime q with q^2 || N and q || c the solutions split into strata by
    B mod 2N; only the stratum q^2 | B is stable under the local Atkin-Lehner
    involution (B and -B agree mod 2N there), and it is the one whose points
    come from generators landing in the non-split Cartan order, so the trace
    relations live there.  heegner_form restricts to it.
    """
    disc = c * c * dK
    if disc >= 0:
        raise ValueError("discriminant must be negative")
    roots = sqrt_mod(disc % (4 * n_level), 4 * n_level, all_roots=True)
    if not roots:
        raise NoHeegnerPoint(f"B^2 = {disc} mod {4 * n_level} has no solution")
    stratum = 1
    for q, e in factorint(gcd(c, n_level)).items():
        if e == 1 and n_level % q ** 2 == 0 and n_level % q ** 3:
            stratum *= q * q
    candidates = []
    for r in roots:
        for b in (r, r - 4 * n_level):
            if b % stratum:
                continue
            cc = (b * b - disc) // (4 * n_level)
            form = BinaryForm(n_level, b, cc)
            if form.is_primitive():
                candidates.append(form)
    if not candidates:
        raise NoHeegnerPoint(f"no primitive form of discriminant {disc} at level "
                             f"{n_level} in the involution-stable stratum")
    return min(candidates, key=lambda f: (abs(f.b), -f.b))


def _gauss_reduce_pair(q: BinaryForm, v1, v2):
    """Lagrange-reduce a lattice basis for the inner product of the form q."""
    def norm(v):
        return q.value(v[0], v[1])

    def inner(u, v):
        return (2 * q.a * u[0] * v[0] + q.b * (u[0] * v[1] + u[1] * v[0])
                + 2 * q.c * u[1] * v[1])

    while True:
        if norm(v2) < norm(v1):
            v1, v2 = v2, v1
        mu = round(inner(v1, v2) / (2 * norm(v1)))
        if mu == 0:
            return v1, v2
        v2 = (v2[0] - mu * v1[0], v2[1] - mu * v1[1])


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    return a, x0, y0


def _complete_unimodular(x: int, y: int):
    """(u, v) with x*v - y*u = 1 for coprime (x, y)."""
    g, u0, v0 = _xgcd(x, y)
    if g < 0:
        g, u0, v0 = -g, -u0, -v0
    assert g == 1
    return -v0, u0


def gamma0_reduce(form: BinaryForm, n_level: int) -> BinaryForm:
    """Small representative of the Gamma_0(N) class of an N-divisible form.

    Minimises A = Q(x, y) over primitive vectors with y = 0 mod N (columns of
    Gamma_0(N) matrices), then translates B into (-A, A].
    """
    if form.a % n_level:
        raise ValueError("form is not N-divisible")
    v1, v2 = _gauss_reduce_pair(form, (1, 0), (0, n_level))
    best = None
    for s in range(-4, 5):
        for t in range(-4, 5):
            if s == 0 and t == 0:
                continue
            x, y = s * v1[0] + t * v2[0], s * v1[1] + t * v2[1]
            if gcd(x, y) != 1:
                continue
            u, v = _complete_unimodular(x, y)
            cand = form.transform(x, u, y, v)
            k = (cand.a - cand.b) // (2 * cand.a)
            cand = BinaryForm(cand.a, cand.b + 2 * cand.a * k,
                              cand.a * k * k + cand.b * k + cand.c)
            key = (cand.a, abs(cand.b), -cand.b)
            if best is None or key < best[0]:
                best = (key, cand)
    assert best is not None
    out = best[1]
    assert out.a % n_level == 0 and out.disc() == form.disc()
    return out


def _smith2(m):
    """(d1, d2) with d1 | d2 and the column transform V: rowops * m * V = diag.

    Row operations change the sublattice basis (free); V is what the ambient
    basis must absorb, so only V is tracked.
    """
    a = [list(m[0]), list(m[1])]
    v = [[1, 0], [0, 1]]

    def colop(i, j, q):
        for r in (0, 1):
            a[r][i] -= q * a[r][j]
            v[r][i] -= q * v[r][j]

    def colswap():
        for r in (0, 1):
            a[r][0], a[r][1] = a[r][1], a[r][0]
            v[r][0], v[r][1] = v[r][1], v[r][0]

    for _ in range(200):
        entries = [(abs(a[i][j]), i, j) for i in (0, 1) for j in (0, 1) if a[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        if i == 1:
            a[0], a[1] = a[1], a[0]
        if j == 1:
            colswap()
        piv = a[0][0]
        if a[1][0] % piv:
            q = a[1][0] // piv
            a[1] = [a[1][0] - q * a[0][0], a[1][1] - q * a[0][1]]
            continue
        if a[0][1] % piv:
            colop(1, 0, a[0][1] // piv)
            continue
        q = a[1][0] // piv
        a[1] = [a[1][0] - q * a[0][0], a[1][1] - q * a[0][1]]
        colop(1, 0, a[0][1] // piv)
        if a[1][1] % piv:
            colop(0, 1, -1)
            continue
        break
    else:
        raise AssertionError("Smith reduction did not terminate")
    return (abs(a[0][0]), abs(a[1][1])), v


def _kernel_ideal_conj(kernel: GaloisKernel, idx: int):
    """Conjugate of the kernel-class ideal lam O_f intersect O_pf, as a lattice."""
    order = kernel.order
    p = kernel.p
    x1, x2 = kernel.classes[idx].generator
    dK, f, t = order.dK, order.f, order.t
    lam = (2 * x1 + x2 * t, x2 * f)
    omega = (t, f)
    lam_omega = ((lam[0] * omega[0] + lam[1] * omega[1] * dK) // 2,
                 (lam[0] * omega[1] + lam[1] * omega[0]) // 2)
    l1 = (lam, lam_omega)
    l2 = ((2, 0), (p * t, p * f))
    meet = lattice_intersect(l1, l2)
    return tuple((u, -v) for u, v in meet)


def _ratio_form(s1, s2, dK: int, conductor: int) -> BinaryForm:
    """Primitive integral form of tau = value(s2) / value(s1), oriented Im > 0."""
    u1, v1 = s1
    u2, v2 = s2
    pp = u1 * u2 - dK * v1 * v2
    qq = u1 * v2 - u2 * v1
    rr = (u1 * u1 - dK * v1 * v1) // 2
    assert qq != 0 and rr > 0
    if qq < 0:
        pp, qq = -pp, -qq
    # tau = (pp + qq sqrt(dK)) / (2 rr):  (2 rr x - pp)^2 = qq^2 dK
    a, b, c = 4 * rr * rr, -4 * pp * rr, pp * pp - qq * qq * dK
    g = gcd(gcd(a, b), c)
    form = BinaryForm(a // g, b // g, c // g)
    assert form.disc() == conductor ** 2 * dK
    return form


def galois_orbit(base: HeegnerTau, kernel: GaloisKernel) -> list[HeegnerTau]:
    """The Gal(H_pf / H_f) orbit of the base point, one member per kernel class.

    Multiplies the point's lattice pair by each kernel ideal and reads the new
    point off a Smith-adapted basis of the cyclic pair.  Members come back in
    the fixed kernel ordering; the identity class reproduces the base point.
    """
    order = kernel.order
    p = kernel.p
    if base.dK != order.dK or base.conductor != p * order.f:
        raise ValueError("kernel and base point disagree on the order")
    n_level = base.n_level
    dK = order.dK
    cond = base.conductor
    l1 = form_to_ideal(base.form, dK, cond)
    # index-N cyclic sublattice <A, N*(-B + sqrt(disc))/2>
    l2 = (l1[0], (n_level * l1[1][0], n_level * l1[1][1]))

    out = []
    for idx in range(len(kernel.classes)):
        abar = _kernel_ideal_conj(kernel, idx)
        m1 = ideal_mul(abar, l1, dK)
        m2 = ideal_mul(abar, l2, dK)
        # coordinates of m2's basis in m1's basis
        det1 = m1[0][0] * m1[1][1] - m1[0][1] * m1[1][0]
        adj = ((m1[1][1], -m1[0][1]), (-m1[1][0], m1[0][0]))
        coords = []
        for row in m2:
            num = (row[0] * adj[0][0] + row[1] * adj[1][0],
                   row[0] * adj[0][1] + row[1] * adj[1][1])
            assert num[0] % det1 == 0 and num[1] % det1 == 0
            coords.append((num[0] // det1, num[1] // det1))
        (d1, d2), v = _smith2(tuple(coords))
        assert d1 == 1 and d2 == n_level, "lattice pair is not cyclic of index N"
        vdet = v[0][0] * v[1][1] - v[0][1] * v[1][0]
        assert abs(vdet) == 1
        vinv = ((v[1][1] * vdet, -v[0][1] * vdet), (-v[1][0] * vdet, v[0][0] * vdet))
        # adapted basis rows s = vinv * m1; then m2 = <s1, N s2>
        s1 = (vinv[0][0] * m1[0][0] + vinv[0][1] * m1[1][0],
              vinv[0][0] * m1[0][1] + vinv[0][1] * m1[1][1])
        s2 = (vinv[1][0] * m1[0][0] + vinv[1][1] * m1[1][0],
              vinv[1][0] * m1[0][1] + vinv[1][1] * m1[1][1])
        form = _ratio_form(s1, s2, dK, cond)
        assert form.a % n_level == 0, "adapted basis lost the level structure"
        form = gamma0_reduce(form, n_level)
        out.append(HeegnerTau(form=form, n_level=n_level, dK=dK, conductor=cond))
    return out
