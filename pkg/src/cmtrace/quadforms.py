"""Imaginary quadratic orders, binary quadratic forms, and ring class kernels.

Class groups Pic(O_f) are modelled by primitive reduced forms of discriminant
f^2 * dK under Gaussian composition.  The Galois group of the ring class field
step H_pf / H_f is realised as the kernel of Pic(O_pf) -> Pic(O_f); the
projection is computed by extending a form's representing ideal to the larger
order.  Each kernel class is tagged with a generator x1 + x2*w_f of the unit
class in (O_f / p O_f)^x / F_p^x that produces it, which is what the matrix
side of the theory consumes.

Ideals are handled as rank-two lattices in half-integer coordinates: the pair
(u, v) stands for (u + v*sqrt(dK)) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt

from sympy import factorint, isprime

from .fp import legendre
from .projline import ProjClass, ProjParams, proj_class, proj_elements


class NotComposableError(ValueError):
    """Internal composition failure; cannot happen for primitive forms of equal disc."""


# ---------------------------------------------------------------------------
# Quadratic characters and orders


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), any integers."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    if e:
        if a % 2 == 0:
            return 0
        if e % 2 and a % 8 in (3, 5):
            sign = -sign
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def is_fundamental_discriminant(d: int) -> bool:
    if d >= 0:
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


@dataclass(frozen=True)
class QuadOrder:
    """Order of conductor f in the imaginary quadratic field of discriminant dK.

    The standard generator w_f = (t + sqrt(disc)) / 2 has characteristic
    polynomial X^2 - t X + n with t^2 - 4n = disc = f^2 dK.
    """

    dK: int
    f: int
    disc: int
    t: int
    n: int


def order_data(dK: int, f: int) -> QuadOrder:
    if not is_fundamental_discriminant(dK):
        raise ValueError(f"{dK} is not a fundamental discriminant")
    if dK >= -4:
        raise ValueError("discriminants -3 and -4 are excluded (extra units)")
    if f < 1:
        raise ValueError("conductor must be positive")
    t = f * (dK % 2)
    disc = f * f * dK
    n = (t * t - disc) // 4
    return QuadOrder(dK=dK, f=f, disc=disc, t=t, n=n)


def proj_params(order: QuadOrder, p: int) -> ProjParams:
    """The P^1(F_p) group parameters carried by this order at an inert prime p."""
    return ProjParams(p, order.t, order.n)


# ---------------------------------------------------------------------------
# Forms


@dataclass(frozen=True, order=True)
class BinaryForm:
    """Primitive positive definite integral form A x^2 + B xy + C y^2."""

    a: int
    b: int
    c: int

    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def content(self) -> int:
        return gcd(gcd(self.a, self.b), self.c)

    def is_primitive(self) -> bool:
        return self.content() == 1

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def inverse(self) -> "BinaryForm":
        return reduce_form(BinaryForm(self.a, -self.b, self.c))

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def transform(self, x: int, u: int, y: int, v: int) -> "BinaryForm":
        """Right action of the matrix with columns (x, y), (u, v); det must be 1."""
        if x * v - y * u != 1:
            raise ValueError("transform must be unimodular")
        a2 = self.value(x, y)
        c2 = self.value(u, v)
        b2 = 2 * (self.a * x * u + self.c * y * v) + self.b * (x * v + y * u)
        return BinaryForm(a2, b2, c2)


def reduce_form(form: BinaryForm) -> BinaryForm:
    """The reduced representative of the proper equivalence class."""
    a, b, c = form.a, form.b, form.c
    if a <= 0 or form.disc() >= 0:
        raise ValueError("only positive definite forms are handled")
    while True:
        if b > a or b <= -a:
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        break
    out = BinaryForm(a, b, c)
    assert out.is_reduced() and out.disc() == form.disc()
    return out


def principal_form(disc: int) -> BinaryForm:
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"invalid negative discriminant {disc}")
    k = disc % 2
    return BinaryForm(1, k, (k * k - disc) // 4)


def reduced_forms(disc: int) -> list[BinaryForm]:
    """All primitive reduced forms of the given negative discriminant, sorted."""
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"invalid negative discriminant {disc}")
    out = []
    bmax = isqrt(-disc // 3)
    for b in range(disc % 2, bmax + 1, 2):
        rhs4 = b * b - disc
        if rhs4 % 4:
            continue
        rhs = rhs4 // 4
        for a in range(max(b, 1), isqrt(rhs) + 1):
            if rhs % a:
                continue
            c = rhs // a
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append(BinaryForm(a, b, c))
            if 0 < b < a < c:
                out.append(BinaryForm(a, -b, c))
    return sorted(out)


def class_number(disc: int) -> int:
    return len(reduced_forms(disc))


# ---------------------------------------------------------------------------
# Composition (Gauss, via the standard two-Euclid formulation).


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, u, v) with u*a + v*b = g = gcd(a, b), g >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def compose(x: BinaryForm, y: BinaryForm) -> BinaryForm:
    """Reduced composition of two primitive forms of equal discriminant."""
    if x.disc() != y.disc():
        raise ValueError("discriminant mismatch")
    if not (x.is_primitive() and y.is_primitive()):
        raise ValueError("composition needs primitive forms")
    if x.a > y.a:
        x, y = y, x
    a1, b1 = x.a, x.b
    a2, b2, c2 = y.a, y.b, y.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        x2, y2, d1 = 0, -1, d
    else:
        d1, u, v = _xgcd(s, d)
        x2, y2 = u, -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    num = c2 * d1 + r * (b2 + v2 * r)
    if num % v1:
        raise NotComposableError("composition bookkeeping failed")
    c3 = num // v1
    return reduce_form(BinaryForm(a3, b3, c3))


def form_pow(x: BinaryForm, k: int) -> BinaryForm:
    acc = principal_form(x.disc())
    base = reduce_form(x) if k >= 0 else x.inverse()
    k = abs(k)
    while k:
        if k & 1:
            acc = compose(acc, base)
        base = compose(base, base)
        k >>= 1
    return acc


class ClassGroup:
    """Pic of the order of the given discriminant, as reduced forms plus tables."""

    def __init__(self, disc: int):
        self.disc = disc
        self.elements = reduced_forms(disc)
        self._index = {f: i for i, f in enumerate(self.elements)}
        self.identity_index = self._index[principal_form(disc)]
        self._table: dict[tuple[int, int], int] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, form: BinaryForm) -> int:
        return self._index[reduce_form(form)]

    def compose_idx(self, i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        got = self._table.get(key)
        if got is None:
            got = self._index[compose(self.elements[i], self.elements[j])]
            self._table[key] = got
        return got

    def cayley(self) -> list[list[int]]:
        n = len(self.elements)
        return [[self.compose_idx(i, j) for j in range(n)] for i in range(n)]

    def inverse_idx(self, i: int) -> int:
        return self._index[self.elements[i].inverse()]

    def order_of(self, i: int) -> int:
        k, j = 1, i
        while j != self.identity_index:
            j = self.compose_idx(j, i)
            k += 1
        return k


# ---------------------------------------------------------------------------
# Ideals as lattices in half-coordinates: (u, v) means (u + v sqrt(dK)) / 2.


def _half_mul(x: tuple[int, int], y: tuple[int, int], dK: int) -> tuple[int, int]:
    u = x[0] * y[0] + x[1] * y[1] * dK
    v = x[0] * y[1] + x[1] * y[0]
    assert u % 2 == 0 and v % 2 == 0, "product left the maximal order"
    return (u // 2, v // 2)


def _hnf2(rows) -> tuple[tuple[int, int], tuple[int, int]]:
    """Upper triangular basis ((e, f), (0, g)), e, g > 0, 0 <= f < g."""
    work = [list(r) for r in rows if r[0] or r[1]]
    while True:
        nz = [r for r in work if r[0]]
        if len(nz) <= 1:
            break
        nz.sort(key=lambda r: abs(r[0]))
        pivot = nz[0]
        for r in nz[1:]:
            q = r[0] // pivot[0]
            r[0] -= q * pivot[0]
            r[1] -= q * pivot[1]
        work = [r for r in work if r[0] or r[1]]
    top = next((r for r in work if r[0]), None)
    if top is None:
        raise ValueError("lattice has rank < 2")
    if top[0] < 0:
        top = [-top[0], -top[1]]
    g = 0
    for r in work:
        if r[0] == 0:
            g = gcd(g, r[1])
    if g == 0:
        raise ValueError("lattice has rank < 2")
    return ((top[0], top[1] % g), (0, g))


def _left_kernel_rows(mat: list[list[int]]) -> list[list[int]]:
    """Basis of the integer left kernel {w : w * mat = 0} via row reduction."""
    m = len(mat)
    n = len(mat[0])
    h = [row[:] for row in mat]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    r = 0
    for j in range(n):
        while True:
            nz = [i for i in range(r, m) if h[i][j]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(h[i][j]))
            h[r], h[piv] = h[piv], h[r]
            u[r], u[piv] = u[piv], u[r]
            done = True
            for i in range(r + 1, m):
                if h[i][j]:
                    q = h[i][j] // h[r][j]
                    h[i] = [h[i][k] - q * h[r][k] for k in range(n)]
                    u[i] = [u[i][k] - q * u[r][k] for k in range(m)]
                    if h[i][j]:
                        done = False
            if done:
                r += 1
                break
    return [u[i] for i in range(m) if not any(h[i])]


def lattice_intersect(l1, l2) -> tuple[tuple[int, int], tuple[int, int]]:
    """Intersection of two full-rank lattices in Z^2 given by basis rows."""
    det2 = l2[0][0] * l2[1][1] - l2[0][1] * l2[1][0]
    adj = ((l2[1][1], -l2[0][1]), (-l2[1][0], l2[0][0]))
    # a = l1 * adj(l2); the condition y*l1 in l2 reads y*a = 0 mod det2.
    a = [[l1[i][0] * adj[0][j] + l1[i][1] * adj[1][j] for j in range(2)] for i in range(2)]
    stacked = [a[0], a[1], [det2, 0], [0, det2]]
    ker = _left_kernel_rows(stacked)
    assert len(ker) == 2, "intersection lattice must have rank 2"
    vecs = []
    for w in ker:
        vecs.append((w[0] * l1[0][0] + w[1] * l1[1][0],
                     w[0] * l1[0][1] + w[1] * l1[1][1]))
    return _hnf2(vecs)


def form_to_ideal(form: BinaryForm, dK: int, cond: int):
    """Representing lattice A*Z + ((-B + cond*sqrt(dK))/2)*Z, in half-coordinates."""
    if form.disc() != cond * cond * dK:
        raise ValueError("form discriminant does not match cond^2 * dK")
    return ((2 * form.a, 0), (-form.b, cond))


def ideal_to_form(lattice, dK: int, cond: int) -> BinaryForm:
    """Reduced form of an oriented proper ideal of the order of conductor cond."""
    (u1, v1), (u2, v2) = _hnf2(lattice)
    cross = u1 * v2 - u2 * v1
    if cross < 0:
        u2, v2, cross = -u2, -v2, -cross
    if cross % (2 * cond):
        raise ValueError("lattice is not an ideal of this order")
    nl = cross // (2 * cond)
    na = (u1 * u1 - dK * v1 * v1) // 4
    nb = (u2 * u2 - dK * v2 * v2) // 4
    tr = (u1 * u2 - dK * v1 * v2) // 2
    if na % nl or nb % nl or tr % nl:
        raise ValueError("lattice is not proper for this order")
    form = BinaryForm(na // nl, -tr // nl, nb // nl)
    if form.disc() != cond * cond * dK or not form.is_primitive():
        raise ValueError("lattice is not proper for this order")
    return reduce_form(form)


def ideal_mul(l1, l2, dK: int):
    rows = [_half_mul(x, y, dK) for x in l1 for y in l2]
    return _hnf2(rows)


def project_form(form: BinaryForm, dK: int, cond_big: int, cond_small: int) -> BinaryForm:
    """Image of a class of disc cond_big^2*dK in Pic of the smaller-conductor order.

    Realised by extending the representing ideal: multiply by the basis of the
    target order and re-read the form.
    """
    if cond_big % cond_small:
        raise ValueError("target conductor must divide the source conductor")
    lat = form_to_ideal(form, dK, cond_big)
    delta = dK % 2
    target_basis = ((2, 0), (cond_small * delta, cond_small))
    ext = ideal_mul(lat, target_basis, dK)
    return ideal_to_form(ext, dK, cond_small)


# ---------------------------------------------------------------------------
# The Galois kernel Pic(O_pf) -> Pic(O_f) with unit-class generators.


@dataclass(frozen=True)
class KernelClass:
    proj: ProjClass
    generator: tuple[int, int]
    form: BinaryForm


@dataclass(frozen=True)
class GaloisKernel:
    order: QuadOrder
    p: int
    classes: tuple[KernelClass, ...]

    def __len__(self) -> int:
        return len(self.classes)


def generator_ideal_form(order: QuadOrder, p: int, x1: int, x2: int) -> BinaryForm:
    """Reduced form of the proper O_pf-ideal (x1 + x2*w_f) O_f  intersect  O_pf."""
    dK, f, t = order.dK, order.f, order.t
    lam = (2 * x1 + x2 * t, x2 * f)
    omega = (t, f)
    l1 = (lam, _half_mul(lam, omega, dK))
    l2 = ((2, 0), (p * t, p * f))
    meet = lattice_intersect(l1, l2)
    return ideal_to_form(meet, dK, p * f)


def kernel_classes(order: QuadOrder, p: int) -> GaloisKernel:
    """The p + 1 classes of Pic(O_pf) that become principal in Pic(O_f).

    Built two ways and cross-checked: by filtering all reduced forms of
    discriminant p^2 f^2 dK through the ideal-extension projection, and by
    constructing one ideal per unit class x1 + x2*w_f of P^1(F_p).
    """
    if not isprime(p) or p == 2:
        raise ValueError("p must be an odd prime")
    if legendre(order.dK % p, p) != -1:
        raise ValueError(f"p = {p} is not inert in the field of discriminant {order.dK}")
    if order.f % p == 0:
        raise ValueError("p must not divide the conductor")
    disc_big = p * p * order.disc
    principal_small = principal_form(order.disc)
    filtered = {
        form for form in reduced_forms(disc_big)
        if project_form(form, order.dK, p * order.f, order.f) == principal_small
    }
    classes = []
    seen = set()
    for pt in proj_elements(p):
        form = generator_ideal_form(order, p, pt.x1, pt.x2)
        classes.append(KernelClass(proj=pt, generator=(pt.x1, pt.x2), form=form))
        seen.add(form)
    if len(seen) != p + 1 or seen != filtered:
        raise AssertionError("kernel construction mismatch between ideal routes")
    return GaloisKernel(order=order, p=p, classes=tuple(classes))


def class_to_proj(order: QuadOrder, p: int, lam: tuple[int, int]) -> ProjClass:
    """Canonical P^1(F_p) class of the unit x1 + x2*w_f; rejects (0, 0) mod p."""
    x1, x2 = lam
    if x1 % p == 0 and x2 % p == 0:
        raise ValueError("both coordinates vanish mod p")
    norm = (x1 * x1 + order.t * x1 * x2 + order.n * x2 * x2) % p
    assert norm != 0, "unit norm vanished at an inert prime"
    return proj_class(p, x1, x2)
