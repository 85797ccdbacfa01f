"""Recognition of floating-point values as exact algebraic numbers.

Rational and imaginary-quadratic recognition run PSLQ-based integer relation
searches and always verify by back-substitution; an exhausted search returns
None (failure to find a relation, never a proof of transcendence).  Values in
an imaginary quadratic field Q(sqrt(d)), d < 0, split into a rational real
part and a rational multiple of sqrt(d), which keeps the search
one-dimensional and robust.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath as mp


@dataclass(frozen=True)
class AlgebraicNumber:
    """Exact value (nu + mu*sqrt(field_disc)) / den; field_disc None means rational."""

    nu: int
    mu: int
    den: int
    field_disc: int | None

    def as_fractions(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.nu, self.den), Fraction(self.mu, self.den)

    def minpoly(self) -> tuple[int, ...]:
        """Coefficients (monic up to content) of an integer polynomial vanishing here."""
        if self.mu == 0 or self.field_disc is None:
            return (self.den, -self.nu)
        # (den*x - nu)^2 = mu^2 * field_disc
        c2 = self.den * self.den
        c1 = -2 * self.den * self.nu
        c0 = self.nu * self.nu - self.mu * self.mu * self.field_disc
        g = gcd(gcd(c2, abs(c1)), abs(c0))
        return (c2 // g, c1 // g, c0 // g)

    def to_mpc(self):
        root = mp.sqrt(mp.mpf(self.field_disc)) if self.field_disc is not None else 0
        return (self.nu + self.mu * root) / self.den


def recognize_rational(x, digits: int, height_bound: int) -> Fraction | None:
    """x as a fraction with numerator and denominator below 10^height_bound."""
    with mp.workdps(digits):
        x = mp.mpf(x)
        if abs(x) < mp.mpf(10) ** (-digits / 2):
            return Fraction(0)
        rel = mp.pslq([x, mp.mpf(1)], maxcoeff=10 ** height_bound,
                      tol=mp.mpf(10) ** (-digits + 6))
        if rel is None or rel[0] == 0:
            return None
        frac = Fraction(int(rel[1]), int(-rel[0]))
        if abs(x - mp.mpf(frac.numerator) / frac.denominator) > mp.mpf(10) ** (-digits / 2):
            return None
        return frac


def recognize_in_quadratic(x, field_disc: int, digits: int,
                           height_bound: int) -> AlgebraicNumber | None:
    """x as an element of Q(sqrt(field_disc)), field_disc < 0, verified."""
    if field_disc >= 0:
        raise ValueError("only imaginary quadratic fields are handled")
    with mp.workdps(digits):
        x = mp.mpc(x)
        re = recognize_rational(x.real, digits, height_bound)
        im = recognize_rational(x.imag / mp.sqrt(mp.mpf(-field_disc)), digits, height_bound)
        if re is None or im is None:
            return None
        den = _lcm(re.denominator, im.denominator)
        out = AlgebraicNumber(nu=re.numerator * (den // re.denominator),
                              mu=im.numerator * (den // im.denominator),
                              den=den, field_disc=field_disc)
        if abs(x - out.to_mpc()) > mp.mpf(10) ** (-digits / 2):
            return None
        return out


def recognize_algebraic(x, field_disc: int | None, degree_bound: int,
                        height_bound: int, digits: int) -> AlgebraicNumber | tuple | None:
    """Exact value of x: rational, quadratic over Q(sqrt(field_disc)), or an
    integer minimal polynomial of degree <= degree_bound found by PSLQ.

    Returns an AlgebraicNumber, a coefficient tuple (leading first), or None.
    """
    if digits < 3 * height_bound:
        raise ValueError("working precision must be at least three times the height bound")
    with mp.workdps(digits):
        x = mp.mpc(x)
        tol = mp.mpf(10) ** (-digits / 2)
        if abs(x.imag) < tol:
            frac = recognize_rational(x.real, digits, height_bound)
            if frac is not None:
                return AlgebraicNumber(frac.numerator, 0, frac.denominator, None)
        if field_disc is not None:
            quad = recognize_in_quadratic(x, field_disc, digits, height_bound)
            if quad is not None:
                return quad
        # Generic integer relation on powers of x (real values only).
        if abs(x.imag) < tol:
            xr = x.real
            for deg in range(2, degree_bound + 1):
                powers = [xr ** k for k in range(deg + 1)]
                rel = mp.pslq(powers, maxcoeff=10 ** height_bound,
                              tol=mp.mpf(10) ** (-digits + 6))
                if rel is None:
                    continue
                val = sum(c * t for c, t in zip(rel, powers))
                if abs(val) < tol:
                    return tuple(int(c) for c in reversed(rel))
        return None


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def curve_equation_holds_exactly(ainvs, x: AlgebraicNumber, y: AlgebraicNumber) -> bool:
    """Exact check of the Weierstrass equation over Q(sqrt(d)) in rational arithmetic."""
    if x.field_disc != y.field_disc:
        return False
    d = x.field_disc
    a1, a2, a3, a4, a6 = (Fraction(v) for v in ainvs)

    def mul(u, v):
        return (u[0] * v[0] + u[1] * v[1] * d, u[0] * v[1] + u[1] * v[0])

    def add(u, v):
        return (u[0] + v[0], u[1] + v[1])

    def smul(s, u):
        return (s * u[0], s * u[1])

    xf = (Fraction(x.nu, x.den), Fraction(x.mu, x.den))
    yf = (Fraction(y.nu, y.den), Fraction(y.mu, y.den))
    lhs = add(mul(yf, yf), add(smul(a1, mul(xf, yf)), smul(a3, yf)))
    x2 = mul(xf, xf)
    rhs = add(mul(x2, xf), add(smul(a2, x2), add(smul(a4, xf), (a6, Fraction(0)))))
    return lhs == rhs
