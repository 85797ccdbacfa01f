"""Evaluation of the weight-two newform and its modular parametrisation, plus
a numerical Atkin-Lehner eigenvalue oracle.

The parametrisation value is sum a_n q^n / n truncated where the tail is
provably below 10^(-digits-10): coefficients obey |a_n| <= sigma_0(n) sqrt(n),
and sigma_0(n)/sqrt(n) <= sqrt(3) (maximise (e+1) p^(-e/2) at p = 2, 3), so
the tail after n_max is at most sqrt(3) |q|^(n_max+1) / (1 - |q|).

Atkin-Lehner eigenvalues are read off numerically from f(W_Q tau) =
w_Q * Q^{-1} (N c tau + Q d)^2 f(tau) at sample points on the circle the
involution stabilises; with this normalisation the global root number of the
curve is -w_N, so rank-zero curves have Fricke eigenvalue -1.
"""

from __future__ import annotations

import mpmath as mp

from .curves import Curve, CurveModel, an_coefficients
from .fp import _xgcd

GUARD = 15
NMAX_CAP = 10 ** 6


class SeriesBudgetError(ArithmeticError):
    """Im(tau) too small for the coefficient budget; carries the needed n_max."""

    def __init__(self, needed: int):
        super().__init__(f"q-series needs {needed} terms, above the cap {NMAX_CAP}")
        self.needed = needed


def phi_terms(im_tau, digits: int) -> int:
    """Terms needed so the parametrisation tail is below 10^(-digits-10)."""
    with mp.workdps(30):
        logq = -2 * mp.pi * mp.mpf(im_tau)          # log |q|
        target = -(digits + 10) * mp.log(10) + mp.log((1 - mp.exp(logq)) / mp.sqrt(3))
        n = int(mp.ceil(target / logq))
    n = max(n, 4)
    if n > NMAX_CAP:
        raise SeriesBudgetError(n)
    return n


def eval_phi(model: CurveModel | Curve, tau, digits: int) -> mp.mpc:
    """Modular parametrisation sum_{n <= n_max} a_n e^{2 pi i n tau} / n."""
    cur = model.minimal if isinstance(model, CurveModel) else model
    with mp.workdps(digits + GUARD):
        tau = mp.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must be in the upper half plane")
        nmax = phi_terms(tau.imag, digits)
        a = an_coefficients(cur, nmax)
        q = mp.exp(2j * mp.pi * tau)
        qn = mp.mpc(1)
        acc = mp.mpc(0)
        for n in range(1, nmax + 1):
            qn *= q
            if a[n]:
                acc += mp.mpf(a[n]) / n * qn
        return +acc


def eval_newform(model: CurveModel | Curve, tau, digits: int) -> mp.mpc:
    """The weight-two form itself, sum a_n q^n, same tail control."""
    cur = model.minimal if isinstance(model, CurveModel) else model
    with mp.workdps(digits + GUARD):
        tau = mp.mpc(tau)
        nmax = phi_terms(tau.imag, digits)
        a = an_coefficients(cur, nmax)
        q = mp.exp(2j * mp.pi * tau)
        qn = mp.mpc(1)
        acc = mp.mpc(0)
        for n in range(1, nmax + 1):
            qn *= q
            if a[n]:
                acc += a[n] * qn
        return +acc


def al_matrix(n_level: int, q_div: int) -> tuple[int, int, int, int]:
    """Integral matrix (Qa, b; Nc, Qd) of determinant Q for the involution W_Q."""
    if n_level % q_div or q_div < 1:
        raise ValueError("Q must divide N")
    comp = n_level // q_div
    from math import gcd
    if gcd(q_div, comp) != 1:
        raise ValueError("W_Q needs gcd(Q, N/Q) = 1")
    if q_div == n_level:
        return (0, -1, n_level, 0)
    g, x, y = _xgcd(q_div, comp)
    assert g == 1
    # Q*a*d - (N/Q)*b*c = 1 with a = x, d = 1, b = -y, c = 1.
    return (q_div * x, -y, n_level, q_div)


class SignConsistencyError(ArithmeticError):
    pass


def atkin_lehner_sign(model: CurveModel, q_div: int, digits: int, samples: int = 5) -> int:
    """Eigenvalue of W_Q on the newform of the curve, for Q || N.

    Samples tau on the norm-Q circle |N c tau + Q d| = sqrt(Q), where both tau
    and W_Q tau have the same imaginary part, and demands all sample ratios
    agree with the same sign to 10^(-digits/2).
    """
    n_level = model.n
    wa, wb, wc, wd = al_matrix(n_level, q_div)
    with mp.workdps(digits + GUARD):
        tol = mp.mpf(10) ** (-mp.mpf(digits) / 2)
        signs = []
        for j in range(samples):
            theta = mp.pi / 3 + j * mp.pi / (3 * max(1, samples - 1))
            # tau on the stabilised circle: N*c*tau + Q*d = sqrt(Q) e^{i theta}.
            tau = (mp.sqrt(q_div) * mp.exp(1j * theta) - wd) / wc
            ftau = eval_newform(model, tau, digits)
            if abs(ftau) < tol:
                continue
            wtau = (wa * tau + wb) / (wc * tau + wd)
            fw = eval_newform(model, wtau, digits)
            ratio = q_div * fw / ((wc * tau + wd) ** 2 * ftau)
            sign = 1 if ratio.real > 0 else -1
            if abs(ratio - sign) > tol:
                raise SignConsistencyError(
                    f"W_{q_div} ratio {mp.nstr(ratio, 8)} is not a sign at tolerance {mp.nstr(tol, 3)}")
            signs.append(sign)
        if not signs or any(s != signs[0] for s in signs):
            raise SignConsistencyError(f"inconsistent W_{q_div} signs across samples: {signs}")
        return signs[0]


def root_number(model: CurveModel, digits: int = 40) -> int:
    """Sign of the functional equation, -1 times the Fricke eigenvalue."""
    return -atkin_lehner_sign(model, model.n, digits)
