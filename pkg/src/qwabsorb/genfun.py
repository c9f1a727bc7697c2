"""Boundary generating functions and the linear-fractional recurrence solver.

The ``t``-th Taylor coefficient of every generating function here is the
amplitude observed at ``|0>|L>`` at step ``t``.  All functions accept numpy
arrays for ``z`` and broadcast.

Powers ``lambda_+^n`` overflow long before ``n = 10^4``, so the sequences
``R_k = lambda_+^k - lambda_-^k`` are only ever used through

    S_k = R_k / (lambda_+^(k-1) (lambda_+ - lambda_-)) = 1 + rho + ... + rho^(k-1),

with ``rho = lambda_- / lambda_+`` and ``|lambda_+| >= |lambda_-|``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BranchError, ConfigurationError, DegenerateCoinError, PoleError
from .walk import TWO_STATE, CoinSpec

POLE_TOL = 1e-14
# below this |1 - rho| the closed geometric sum loses digits; sum directly
NEAR_DEGENERATE = 1e-6


# --------------------------------------------------------------------------- #
#                               Square roots                                  #
# --------------------------------------------------------------------------- #


def disk_sqrt(poly: Sequence[complex], z):
    """Square root of a polynomial that is analytic on the unit disk.

    ``poly`` holds coefficients highest power first.  All roots must satisfy
    ``|root| >= 1``; the result is ``sqrt(P(0)) * prod sqrt(1 - z/root)``,
    which is continuous on the closed disk and equals ``+sqrt(P(0))`` at 0.
    """
    poly = np.trim_zeros(np.asarray(poly, dtype=complex), "f")
    z = np.asarray(z, dtype=complex)
    p0 = poly[-1]
    if p0 == 0:
        raise BranchError("polynomial vanishes at z = 0")
    out = np.full(z.shape, np.sqrt(p0), dtype=complex)
    for root in np.roots(poly):
        if abs(root) < 1 - 1e-9:
            raise BranchError(f"root {root} lies inside the unit disk")
        out = out * np.sqrt(1 - z / root)
    return out


def _sqrt_unit_quadratic(bcoef, z):
    """Analytic sqrt of ``z^2 + bcoef z + 1`` for real ``|bcoef| <= 2``
    (both roots on the unit circle).  Vectorized over ``bcoef`` and ``z``."""
    bcoef = np.asarray(bcoef, dtype=complex)
    disc = np.sqrt(bcoef * bcoef - 4)
    r1 = (-bcoef + disc) / 2
    r2 = (-bcoef - disc) / 2
    return np.sqrt(1 - z / r1) * np.sqrt(1 - z / r2)


# --------------------------------------------------------------------------- #
#                          Linear-fractional machinery                        #
# --------------------------------------------------------------------------- #


def _ordered_roots(trace, det):
    """Roots of ``x^2 - trace x + det``, larger modulus first."""
    trace = np.asarray(trace, dtype=complex)
    det = np.asarray(det, dtype=complex)
    disc = np.sqrt(trace * trace - 4 * det)
    lp = (trace + disc) / 2
    lm = (trace - disc) / 2
    swap = np.abs(lm) > np.abs(lp)
    return np.where(swap, lm, lp), np.where(swap, lp, lm)


def geometric_sums(ks: Sequence[int], lam_p, lam_m):
    """``S_k`` for each ``k`` in ``ks`` (see module docstring).

    Returns a list aligned with ``ks``.  Near-degenerate entries
    (``|1 - rho| < 1e-6``) are summed by the recurrence ``S_(k+1) = 1 + rho S_k``.
    """
    lam_p, lam_m = np.broadcast_arrays(np.asarray(lam_p, dtype=complex),
                                       np.asarray(lam_m, dtype=complex))
    shape = lam_p.shape
    lp, lm = lam_p.ravel(), lam_m.ravel()
    rho = np.divide(lm, lp, out=np.zeros_like(lp), where=lp != 0)
    near = np.abs(1 - rho) < NEAR_DEGENERATE
    base = np.where(near, 1, 1 - rho)
    wanted = set(int(k) for k in ks)
    res = {k: (1 - rho ** k) / base for k in wanted}
    if near.any():
        rn = rho[near]
        acc = np.zeros_like(rn)
        for k in range(1, max(wanted) + 1):
            acc = 1 + rn * acc
            if k in wanted:
                res[k][near] = acc
    return [res[int(k)].reshape(shape) for k in ks]


def _check_pole(den, what: str, n, z):
    bad = np.abs(den) < POLE_TOL
    if np.any(bad):
        zb = np.asarray(z)[bad] if np.ndim(z) else z
        raise PoleError(f"{what}: denominator vanishes at n={n}, z={np.ravel(zb)[:3]}")


@dataclass(frozen=True)
class LFCoefficients:
    """Recurrence ``f_(n+1) = (a f_n + b) / (c f_n + d)``, ``f_1 = 0``.

    Each coefficient is either a polynomial in ``z`` (coefficients in
    ascending powers) or a callable ``z -> value``.
    """

    a: object
    b: object
    c: object
    d: object

    @staticmethod
    def _eval(coef, z):
        if callable(coef):
            return np.asarray(coef(z), dtype=complex)
        return np.polynomial.polynomial.polyval(z, np.asarray(coef, dtype=complex))

    def at(self, z):
        z = np.asarray(z, dtype=complex)
        return tuple(self._eval(c, z) for c in (self.a, self.b, self.c, self.d))

    def iterate(self, n: int, z):
        """Naive iteration from ``f_1 = 0``."""
        a, b, c, d = self.at(z)
        f = np.zeros(np.shape(z), dtype=complex)
        for _ in range(n - 1):
            f = (a * f + b) / (c * f + d)
        return f


class RSequence:
    """``lambda_pm(z)`` and ``R_n(z) = lambda_+^n - lambda_-^n`` for a family."""

    def __init__(self, family: str, coeffs: Optional[LFCoefficients] = None,
                 coin: Optional[CoinSpec] = None):
        self.family = family
        self.coeffs = coeffs
        self.coin = coin
        if family == "custom" and coeffs is None:
            raise ConfigurationError("custom RSequence needs coefficients")
        if family == "two-state" and coin is None:
            raise ConfigurationError("two-state RSequence needs a coin")

    def trace_det(self, z):
        z = np.asarray(z, dtype=complex)
        if self.family == "two-state":
            return 1 + z * z, abs(self.coin.a) ** 2 * z * z
        if self.family == "grover3":
            return -(z - 1) * (3 * z * z + 4 * z + 3), z * z * (z - 1) ** 2
        if self.family == "grover2d":
            raise ConfigurationError("use grover2d.wall_coefficients for the 2D family")
        a, b, c, d = self.coeffs.at(z)
        return a + d, a * d - b * c

    def lambdas(self, z):
        """``(lambda_+, lambda_-)`` with ``|lambda_+| >= |lambda_-|``."""
        return _ordered_roots(*self.trace_det(z))

    def R(self, n: int, z):
        lp, lm = self.lambdas(z)
        return lp ** n - lm ** n

    def recurrence_residual(self, n: int, z):
        """Relative residual of ``R_(n+2) - (a+d) R_(n+1) + (ad-bc) R_n``."""
        tr, det = self.trace_det(z)
        r0, r1, r2 = self.R(n, z), self.R(n + 1, z), self.R(n + 2, z)
        scale = np.abs(r2) + np.abs(tr * r1) + np.abs(det * r0)
        return np.abs(r2 - tr * r1 + det * r0) / np.where(scale == 0, 1, scale)


def solve_linear_fractional(coeffs: LFCoefficients, n: int, z):
    """Closed form ``f_n = b R_(n-1) / (R_n - a R_(n-1))`` of the recurrence."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    z = np.asarray(z, dtype=complex)
    a, b, c, d = coeffs.at(z)
    if n == 1:
        return np.zeros(np.broadcast(a, b, c, d).shape, dtype=complex)
    lp, lm = _ordered_roots(a + d, a * d - b * c)
    (s_nm1,) = geometric_sums([n - 1], lp, lm)
    rho = np.divide(lm, lp, out=np.zeros_like(lp), where=lp != 0)
    # lambda_+ - a cancels when c is small; (lambda_+ - a)(lambda_+ - d) = bc
    # gives it without cancellation whenever lambda_+ is far from d
    direct = lp - a
    other = lp - d
    lpa = np.where(np.abs(other) > np.abs(direct),
                   b * c / np.where(other == 0, 1, other), direct)
    den = lpa * s_nm1 + lp * rho ** (n - 1)
    _check_pole(den, "linear-fractional solution", n, z)
    return b * s_nm1 / den


# --------------------------------------------------------------------------- #
#                            Two-state walk                                   #
# --------------------------------------------------------------------------- #


def _two_state_coin(coin: CoinSpec):
    if coin.kind != TWO_STATE:
        raise ConfigurationError("expected a two-state coin")
    if coin.a == 0 or coin.b == 0:
        raise DegenerateCoinError(f"closed forms need a != 0 and b != 0 (a={coin.a}, b={coin.b})")
    return coin.a, coin.b


def _two_state_sqrt(coin: CoinSpec, z):
    """``sqrt(z^4 + 2(|b|^2-|a|^2) z^2 + 1)`` on the analytic branch."""
    alpha = abs(coin.b) ** 2 - abs(coin.a) ** 2
    # the quartic is a quadratic in w = z^2 with unimodular roots
    return _sqrt_unit_quadratic(2 * alpha, np.asarray(z, dtype=complex) ** 2)


def two_state_semi(component: str, m: int, coin: CoinSpec, z):
    """``r_inf^(m)(z)`` (start ``|m>|R>``) or ``l_inf^(m)(z)`` (start ``|m>|L>``)
    for the walk absorbed at 0 only."""
    a, b = _two_state_coin(coin)
    if m < 1:
        raise ConfigurationError(f"m must be >= 1, got {m}")
    z = np.asarray(z, dtype=complex)
    s = _two_state_sqrt(coin, z)
    # rationalized: (1 - z^2 - s) / (2bz) == -2 conj(b) z / (1 - z^2 + s)
    r1 = -2 * np.conj(b) * z / (1 - z * z + s)
    l1 = 2 * np.conj(a) * z / (1 + z * z + s)
    if component == "r":
        return r1 * l1 ** (m - 1)
    if component == "l":
        return l1 ** m
    raise ConfigurationError(f"two-state component must be 'r' or 'l', got {component!r}")


def two_state_semi_printed(component: str, m: int, coin: CoinSpec, z):
    """The unrationalized closed forms, ``(1/(2az))^m (...)``, kept as a check."""
    a, b = _two_state_coin(coin)
    z = np.asarray(z, dtype=complex)
    s = _two_state_sqrt(coin, z)
    lfac = (1 + z * z - s) / (2 * a * z)
    if component == "r":
        return (a / b) * (1 / (2 * a * z)) ** m * (1 - z * z - s) * (1 + z * z - s) ** (m - 1)
    return lfac ** m


def two_state_rsequence(coin: CoinSpec) -> RSequence:
    return RSequence("two-state", coin=coin)


def two_state_finite(component: str, m: int, n: int, coin: CoinSpec, z,
                     conjugate_reciprocal: bool = False):
    """``r_n^(m)`` or ``l_n^(m)`` for absorbers at 0 and ``n``.

    With ``conjugate_reciprocal`` returns ``conj(f(1/conj(z)))`` through its
    own closed form (denominators ``R_n - R_(n-1)``).
    """
    a, b = _two_state_coin(coin)
    if not 1 <= m < n:
        raise ConfigurationError(f"need 1 <= m < n, got m={m}, n={n}")
    z = np.asarray(z, dtype=complex)
    lp, lm = two_state_rsequence(coin).lambdas(z)
    s = dict(zip((n - m - 1, n - m, n - 1, n),
                 geometric_sums([n - m - 1, n - m, n - 1, n], lp, lm)))
    q = np.ones_like(z) if conjugate_reciprocal else z * z
    den = s[n] - q * s[n - 1] / lp
    _check_pole(den, "two-state finite generating function", n, z)
    zl = (z / lp) ** m
    if conjugate_reciprocal:
        pa, pb = a, b
    else:
        pa, pb = np.conj(a), np.conj(b)
    if component == "r":
        sign = -1
        return sign * pb * pa ** (m - 1) * zl * s[n - m] / den
    if component == "l":
        return pa ** m * zl * (s[n - m] - q * s[n - m - 1] / lp) / den
    raise ConfigurationError(f"two-state component must be 'r' or 'l', got {component!r}")


# --------------------------------------------------------------------------- #
#                         Three-state Grover walk                             #
# --------------------------------------------------------------------------- #

GROVER3_DISC = (9.0, 6.0, 9.0)  # 9 z^2 + 6 z + 9, highest power first


def _grover3_sqrt(z):
    return disk_sqrt(GROVER3_DISC, z)


def grover3_semi(component: str, m: int, z):
    """``r``, ``l`` or ``s`` generating function of the lazy Grover walk with a
    single absorber at 0, started at ``|m>`` in direction R, L or S."""
    if m < 1:
        raise ConfigurationError(f"m must be >= 1, got {m}")
    z = np.asarray(z, dtype=complex)
    sq = _grover3_sqrt(z)
    r1 = 4 * z / (3 - 2 * z + 3 * z * z + (1 - z) * sq)
    # the remaining two come from the first-step system once r is known
    l1 = z * (z - 1) / ((3 + z) - 2 * z * (z + 1) * r1)
    s1 = 2 * z * (1 + r1 * l1) / (3 + z)
    if component == "r":
        return r1 * l1 ** (m - 1)
    if component == "l":
        return l1 ** m
    if component == "s":
        return s1 * l1 ** (m - 1)
    raise ConfigurationError(f"Grover3 component must be 'r', 'l' or 's', got {component!r}")


def grover3_semi_printed(component: str, z):
    """The m = 1 factors exactly as typeset (``r`` carries a sign typo)."""
    z = np.asarray(z, dtype=complex)
    sq = _grover3_sqrt(z)
    if component == "r":
        return (3 + 2 * z + 3 * z * z + (z - 1) * sq) / (4 * z)
    return (-3 - 4 * z - 3 * z * z + (z + 1) * sq) / (2 * z)


def grover3_semi_system_residual(z):
    """Max residual of the three first-step equations at ``z``."""
    r, l, s = (grover3_semi(c, 1, z) for c in "rls")
    x = r * l
    e1 = r - (2 * z / 3 + 2 * z / 3 * s - z / 3 * x)
    e2 = s - (2 * z / 3 - z / 3 * s + 2 * z / 3 * x)
    e3 = l - (-z / 3 + 2 * z / 3 * s + 2 * z / 3 * x)
    return np.maximum(np.maximum(np.abs(e1), np.abs(e2)), np.abs(e3))


def grover3_deltas(z):
    """``delta_pm(z)`` ordered by modulus; ``lambda_pm = (z-1) delta_pm``."""
    z = np.asarray(z, dtype=complex)
    return _ordered_roots(-(3 * z * z + 4 * z + 3), z * z)


def grover3_rsequence() -> RSequence:
    return RSequence("grover3")


def grover3_finite(component: str, m: int, n: int, z, conjugate_reciprocal: bool = False):
    """``r_n^(m)`` or ``l_n^(m)`` of the lazy Grover walk on ``{0..n}``.

    ``R_k = (z-1)^k F_k`` with ``F_k`` built from ``delta_pm``; the powers of
    ``(z-1)`` cancel, which keeps the forms finite at ``z = 1``.
    """
    if not 1 <= m < n:
        raise ConfigurationError(f"need 1 <= m < n, got m={m}, n={n}")
    z = np.asarray(z, dtype=complex)
    dp, dm = grover3_deltas(z)
    s = dict(zip((n - m - 1, n - m, n - 1, n),
                 geometric_sums([n - m - 1, n - m, n - 1, n], dp, dm)))
    q = -(z + 3) if conjugate_reciprocal else z * z * (1 + 3 * z)
    den = (z - 1) * s[n] + q * s[n - 1] / dp
    _check_pole(den, "Grover3 finite generating function", n, z)
    zl = (z / dp) ** m
    if component == "r":
        sign = -1 if conjugate_reciprocal else 1
        return sign * 2 * (z + 1) * zl * s[n - m] / den
    if component == "l":
        return zl * ((z - 1) * s[n - m] + q * s[n - m - 1] / dp) / den
    raise ConfigurationError(f"Grover3 finite component must be 'r' or 'l', got {component!r}")


# --------------------------------------------------------------------------- #
#                               Handles                                       #
# --------------------------------------------------------------------------- #

WALKS = ("two-state-semi", "two-state-finite", "grover3-semi", "grover3-finite")


@dataclass(frozen=True)
class GenFunHandle:
    """A generating function bound to its walk, component and positions."""

    walk: str
    component: str
    m: int
    n: Optional[int] = None
    coin: Optional[CoinSpec] = None

    def __post_init__(self):
        if self.walk not in WALKS:
            raise ConfigurationError(f"unknown walk {self.walk!r}")
        if self.walk.endswith("finite") and self.n is None:
            raise ConfigurationError("finite walks need n")
        if self.walk.startswith("two-state") and self.coin is None:
            raise ConfigurationError("two-state walks need a coin")

    def __call__(self, z):
        return self.evaluator()(z)

    def evaluator(self, conjugate_reciprocal: bool = False) -> Callable:
        w, c, m, n, coin = self.walk, self.component, self.m, self.n, self.coin
        if w == "two-state-semi":
            f = lambda z: two_state_semi(c, m, coin, z)
        elif w == "grover3-semi":
            f = lambda z: grover3_semi(c, m, z)
        elif w == "two-state-finite":
            return lambda z: two_state_finite(c, m, n, coin, z, conjugate_reciprocal)
        else:
            return lambda z: grover3_finite(c, m, n, z, conjugate_reciprocal)
        if not conjugate_reciprocal:
            return f
        return lambda z: np.conj(f(1 / np.conj(np.asarray(z, dtype=complex))))

    def check_branch(self, radius: float = 0.5, nodes: int = 256, tol: float = 1e-9) -> None:
        """Raise BranchError unless the Taylor series has no constant term."""
        z = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
        c0 = np.mean(self(z))
        if abs(c0) > tol:
            raise BranchError(f"{self.walk}/{self.component}: constant term {c0:.3g} != 0")
