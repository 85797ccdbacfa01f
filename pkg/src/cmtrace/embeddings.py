"""Optimal embeddings of quadratic orders into Cartan orders at p, and the
finite coset combinatorics they induce.

The conjugation step sends the companion matrix of X^2 - tX + n mod p into the
non-split Cartan subgroup by an SL_2(F_p) conjugator (possible because the
determinant is surjective on the centralizer).  On top of that sit the
decomposition of Cartan elements into an SL_2 part times a split-normalizer
part, canonical labels for the resulting cosets, and the two-to-one fiber
structure over P^1(F_p) whose fiber partners differ by the unique involution.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .fp import (FpMatrix, FpParams, cartan_intersection_ns_s, identity,
                 in_cartan_group, legendre, sqrt_mod_p)
from .projline import ProjClass, involution_class, proj_class, proj_elements, proj_mul
from .quadforms import GaloisKernel, QuadOrder, proj_params


class EmbeddingError(ValueError):
    pass


class FiberStructureError(AssertionError):
    """The two-to-one fiber structure failed; indicates corrupted inputs."""


@dataclass(frozen=True)
class EmbeddingData:
    """Matrix-level data of an optimal embedding at p.

    iota_omega is the image of the order generator: an element of C_ns with
    trace t and determinant n mod p, off-diagonal entries nonzero, obtained by
    conjugating the companion matrix a0 by gamma_bar in SL_2(F_p).  level_m
    records the prime-to-p part of the ambient order's discriminant.
    """

    params: FpParams
    order: QuadOrder
    level_m: int
    a0: FpMatrix
    gamma_bar: FpMatrix
    iota_omega: FpMatrix

    @property
    def a(self) -> int:
        return self.iota_omega.a

    @property
    def b(self) -> int:
        return self.iota_omega.b

    @property
    def c(self) -> int:
        return self.iota_omega.c

    @property
    def d(self) -> int:
        return self.iota_omega.d

    def proj_params(self):
        return proj_params(self.order, self.params.p)


@dataclass(frozen=True)
class GammaDecomposition:
    """r_bar = gamma_i * r_s with gamma_i in SL_2 cap C_ns+ and r_s in C_s+."""

    r_bar: FpMatrix
    gamma_i: FpMatrix
    r_s: FpMatrix
    kernel_class: ProjClass | None = None


@dataclass(frozen=True, order=True)
class CosetLabel:
    """Canonical representative of the right coset (C_s+ cap SL_2) * g^{-1}."""

    rep: FpMatrix


def build_embedding(params: FpParams, order: QuadOrder, level_m: int = 1) -> EmbeddingData:
    """Construct the embedding data for an inert prime p coprime to f * level_m."""
    p, eps = params.p, params.eps
    if legendre(order.disc % p, p) != -1:
        raise EmbeddingError(f"p = {p} is not inert (discriminant is a square mod p)")
    if gcd(p, order.f * level_m) != 1:
        raise EmbeddingError("p must be coprime to the conductor and to level_m")
    t, n = order.t % p, order.n % p
    a0 = FpMatrix(p, 0, -n, 1, t)
    # Target in C_ns: (t/2, s; eps*s, t/2) with eps*s^2 = (t^2-4n)/4; the
    # right side is a non-square times the inverse of a square, so s exists.
    inv2 = pow(2, -1, p)
    dd = (t * t - 4 * n) % p
    s = sqrt_mod_p(dd * pow(4 * eps, -1, p) % p, p)
    target = FpMatrix(p, t * inv2, s, eps * s, t * inv2)
    assert target.charpoly_coeffs() == (t, n)

    # Any conjugator from a0 to target is a centralizer multiple of one of
    # them; scan u + v*a0 for the determinant that lands us in SL_2.
    g0 = FpMatrix(p, 1, target.a, 0, target.c)      # columns e1, target*e1
    gamma0 = g0.inv()
    need = g0.det()                                  # N(u + v*a0) must equal this
    gamma_bar = None
    for u in range(p):
        for v in range(p):
            if (u * u + t * u * v + n * v * v - need) % p == 0 and (u or v):
                z = FpMatrix(p, u, -n * v, v, u + t * v)   # u*I + v*a0
                gamma_bar = z.mul(gamma0)
                break
        if gamma_bar is not None:
            break
    assert gamma_bar is not None and gamma_bar.det() == 1
    iota = gamma_bar.inv().mul(a0).mul(gamma_bar)
    assert iota == target
    emb = EmbeddingData(params=params, order=order, level_m=level_m,
                        a0=a0, gamma_bar=gamma_bar, iota_omega=iota)
    assert verify_optimal(emb)
    return emb


def verify_optimal(emb: EmbeddingData) -> bool:
    """Optimality at p: generator lands in C_ns, and p divides neither
    off-diagonal entry (which is what forces integrality of split-side
    coefficients)."""
    p = emb.params.p
    io = emb.iota_omega
    if not in_cartan_group(io, "ns", emb.params):
        return False
    if io.b == 0 or io.c == 0:
        return False
    if io.charpoly_coeffs() != (emb.order.t % p, emb.order.n % p):
        return False
    if (2 * io.a - emb.order.t) % p != 0:
        return False
    return True


def galois_matrix(emb: EmbeddingData, x1: int, x2: int) -> FpMatrix:
    """The matrix x1*I + x2*iota_omega; invertible whenever (x1, x2) != (0, 0)."""
    p = emb.params.p
    if x1 % p == 0 and x2 % p == 0:
        raise ValueError("zero pair")
    m = identity(p).scale(x1).add(emb.iota_omega.scale(x2))
    assert m.is_invertible(), "norm form vanished at an inert prime"
    return m


def lemma_converse_check(emb: EmbeddingData) -> bool:
    """Scan P^1(F_p): membership in the split-normalizer pattern happens exactly
    at the identity class and the involution class [-a : 1]."""
    p = emb.params.p
    expected = {proj_class(p, 1, 0), proj_class(p, -emb.a, 1)}
    hits = set()
    for pt in proj_elements(p):
        m = galois_matrix(emb, pt.x1, pt.x2)
        if (m.is_diagonal() or m.is_antidiagonal()):
            hits.add(pt)
    return hits == expected


def decompose_gamma(emb: EmbeddingData, r_bar: FpMatrix) -> GammaDecomposition:
    """Split r_bar in C_ns as gamma_i * r_s, det(gamma_i) = 1, r_s in C_s+.

    The corrector m is searched in C_ns+ cap C_s+ for det(m) = det(r_bar)^{-1};
    squares are fixed by scalars and non-squares by antidiagonal elements, so
    the search always succeeds.
    """
    params = emb.params
    if not in_cartan_group(r_bar, "ns", params):
        raise EmbeddingError("matrix is not in the non-split Cartan group")
    want = pow(r_bar.det(), -1, params.p)
    m = next(x for x in cartan_intersection_ns_s(params) if x.det() == want)
    gamma_i = r_bar.mul(m)
    r_s = m.inv()
    assert gamma_i.det() == 1
    assert in_cartan_group(gamma_i, "ns+", params)
    assert in_cartan_group(r_s, "s+", params)
    assert gamma_i.mul(r_s) == r_bar
    return GammaDecomposition(r_bar=r_bar, gamma_i=gamma_i, r_s=r_s)


def split_normalizer_sl2(p: int) -> list[FpMatrix]:
    """C_s+ cap SL_2(F_p): diagonal (a, a^{-1}) and antidiagonal (0, b; -b^{-1}, 0)."""
    out = []
    for a in range(1, p):
        out.append(FpMatrix(p, a, 0, 0, pow(a, -1, p)))
        out.append(FpMatrix(p, 0, a, -pow(a, -1, p), 0))
    return sorted(out)


def coset_label(g: FpMatrix) -> CosetLabel:
    """Canonical (lexicographically minimal) element of (C_s+ cap SL_2) * g^{-1}."""
    if g.det() != 1:
        raise ValueError("coset labels are defined for determinant-one matrices")
    ginv = g.inv()
    rep = min(h.mul(ginv) for h in split_normalizer_sl2(g.p))
    return CosetLabel(rep=rep)


def two_to_one_check(emb: EmbeddingData, kernel: GaloisKernel) -> dict[CosetLabel, list[ProjClass]]:
    """Map each kernel class through decomposition to its coset label.

    Enforces the expected structure: (p+1)/2 distinct labels, every fiber of
    size exactly two, and fiber partners differing by the involution class.
    """
    params = emb.params
    p = params.p
    if kernel.p != p or kernel.order != emb.order:
        raise ValueError("kernel and embedding disagree on (order, p)")
    fibers: dict[CosetLabel, list[ProjClass]] = {}
    for kc in kernel.classes:
        x1, x2 = kc.generator
        r_bar = galois_matrix(emb, x1, x2)
        assert in_cartan_group(r_bar, "ns", params)
        dec = decompose_gamma(emb, r_bar)
        label = coset_label(dec.gamma_i)
        fibers.setdefault(label, []).append(kc.proj)
    if len(fibers) != (p + 1) // 2:
        raise FiberStructureError(f"expected {(p + 1) // 2} labels, got {len(fibers)}")
    pp = emb.proj_params()
    invol = involution_class(pp, emb.a)
    for label, classes in fibers.items():
        if len(classes) != 2:
            raise FiberStructureError(f"fiber of {label} has size {len(classes)}")
        if proj_mul(pp, classes[0], invol) != classes[1]:
            raise FiberStructureError("fiber partners do not differ by the involution")
    return fibers


def signo_pairing_check(emb: EmbeddingData) -> bool:
    """The involution's matrix factors through (0,1;-1,0) times a split element,
    i.e. it lies in C_s+ but not C_s."""
    params = emb.params
    p = params.p
    w = galois_matrix(emb, -emb.a, 1)
    if not (in_cartan_group(w, "s+", params) and not in_cartan_group(w, "s", params)):
        return False
    j = FpMatrix(p, 0, 1, -1, 0)
    sigma = j.inv().mul(w)
    return sigma.is_diagonal() and sigma.is_invertible()


def find_common_norm_element(params: FpParams, l: int) -> FpMatrix:
    """Element of C_s+ cap C_ns+ with determinant l: a scalar when l is a
    square, an antidiagonal (0, b; -eps*b, 0) with eps*b^2 = l otherwise."""
    p, eps = params.p, params.eps
    l %= p
    if l == 0:
        raise ValueError("determinant must be a unit")
    if legendre(l, p) == 1:
        mu = sqrt_mod_p(l, p)
        out = FpMatrix(p, mu, 0, 0, mu)
    else:
        b = sqrt_mod_p(l * pow(eps, -1, p) % p, p)
        out = FpMatrix(p, 0, b, -eps * b, 0)
    assert out.det() == l
    assert in_cartan_group(out, "ns+", params) and in_cartan_group(out, "s+", params)
    return out
