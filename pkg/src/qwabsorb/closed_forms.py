"""Closed-form absorption probabilities, limits and recurrences.

Covers the classical walk, the two-state walk ``U = [[a, b], [-conj(b), conj(a)]]``
and the three-state Grover walk.  Sequences such as
``R_k = (1+x)^k - (1-x)^k`` are evaluated through the ratio
``rho = (1-x)/(1+x)`` so that ``n`` in the thousands neither overflows nor
cancels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, IntegrityError
from .walk import TWO_STATE, CoinSpec

OMEGA = 1 / 3 + 2j * math.sqrt(2) / 3
GROVER3_SEMI_VALUE = (5 * math.sqrt(2) / (2 * math.pi)
                      - 3 * math.asin(1 / 3) / (4 * math.pi) - 0.375)
EQ56_COEFFS = (1, -134, 3599, -6932, 3599, -134, 1)


# --------------------------------------------------------------------------- #
#                          Normalized power sequences                         #
# --------------------------------------------------------------------------- #


def _one_minus_pow(rho, k: int):
    """``1 - rho^k`` without cancellation for real ``rho`` near 1."""
    if k == 0:
        return 0.0 * rho
    if isinstance(rho, complex) and abs(rho.imag) > 1e-15 * abs(rho):
        return 1 - rho ** k
    r = float(np.real(rho))
    if r > 0:
        return -math.expm1(k * math.log(r))
    return 1 - r ** k


class PowerPair:
    """Ratios of products of ``F_k = p^k - q^k`` and ``B_k = p^k + q^k``.

    ``p`` and ``q`` are labelled as given; internally everything is scaled by
    the root of larger modulus.
    """

    def __init__(self, p, q):
        self.p, self.q = p, q
        if abs(p) >= abs(q):
            self.dom, self.f_sign = p, 1
            self.rho = q / p if p != 0 else 0.0
        else:
            self.dom, self.f_sign = q, -1
            self.rho = p / q

    def _factor(self, kind: str, k: int):
        if k < 0:
            raise ConfigurationError("sequence index must be >= 0")
        if kind == "F":
            return self.f_sign * _one_minus_pow(self.rho, k)
        return 2 - _one_minus_pow(self.rho, k)

    def ratio(self, num: Sequence[Tuple[str, int]], den: Sequence[Tuple[str, int]]):
        val = 1.0
        for kind, k in num:
            val = val * self._factor(kind, k)
        for kind, k in den:
            val = val / self._factor(kind, k)
        expo = sum(k for _, k in num) - sum(k for _, k in den)
        return val * self.dom ** expo if expo else val


# --------------------------------------------------------------------------- #
#                               Classical walk                                #
# --------------------------------------------------------------------------- #


def _check_pq(p: float, q: Optional[float]) -> float:
    q = 1 - p if q is None else q
    if not (0 < p < 1 and abs(p + q - 1) < 1e-12):
        raise ConfigurationError(f"need 0 < p < 1 and p + q = 1, got p={p}, q={q}")
    return q


def classical_closed(p: float, q: Optional[float], m: int, n: Optional[int] = None) -> float:
    """Probability that the classical walk from ``m`` is absorbed at 0
    (before ``n`` when ``n`` is given)."""
    q = _check_pq(p, q)
    if n is None or n == math.inf:
        if m < 1:
            raise ConfigurationError("need m >= 1")
        return 1.0 if p <= q else (q / p) ** m
    if not 0 < m < n:
        raise ConfigurationError(f"need 0 < m < n, got m={m}, n={n}")
    if p == q:
        return 1 - m / n
    # q^m (p^(n-m) - q^(n-m)) / (p^n - q^n), scaled by the larger of p, q
    big, small = max(p, q), min(p, q)
    r = small / big
    tail = -math.expm1((n - m) * math.log(r)) / -math.expm1(n * math.log(r))
    return (q / p) ** m * tail if p > q else tail


def classical_limit(p: float, q: Optional[float], m: int) -> float:
    """``lim_n P_n^(m)``; equals the semi-infinite value."""
    return classical_closed(p, q, m, None)


def classical_ray_limit(p: float, q: Optional[float], c: float) -> float:
    """``lim_n P_n^(cn)`` for ``0 < c < 1``."""
    q = _check_pq(p, q)
    if not 0 < c < 1:
        raise ConfigurationError("need 0 < c < 1")
    if p > q:
        return 0.0
    return 1 - c if p == q else 1.0


def ray_position(c: float, n: int) -> int:
    """``floor(c n)`` clipped into ``[1, n-1]``."""
    return min(max(int(math.floor(c * n)), 1), n - 1)


def classical_recurrence_residuals(p: float, q: Optional[float], n: int) -> Dict[str, float]:
    """Max absolute residuals of the three classical recurrences.

    ``lattice``: ``P_(k+1)^(1) = q / (1 - p P_k^(1))`` for ``2 <= k < n``;
    ``product``: ``P_n^(m) = prod_k P_(n-m+k)^(1)``;
    ``position``: ``P^(m+2) - P^(m+1)/p + (q/p) P^(m) = 0``.
    """
    q = _check_pq(p, q)
    one = {k: classical_closed(p, q, 1, k) for k in range(2, n + 1)}
    lattice = max(abs(one[k + 1] - q / (1 - p * one[k])) for k in range(2, n))
    product = max(abs(classical_closed(p, q, m, n) - math.prod(one[n - m + k] for k in range(1, m + 1)))
                  for m in range(1, n))
    pm = [classical_closed(p, q, m, n) for m in range(1, n)]
    position = max(abs(pm[i + 2] - pm[i + 1] / p + q / p * pm[i]) for i in range(len(pm) - 2))
    return {"lattice": lattice, "product": product, "position": position}


# --------------------------------------------------------------------------- #
#                               Two-state walk                                #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class RBPair:
    """``R_n = (1+x)^n - (1-x)^n`` and ``B_n = (1+x)^n + (1-x)^n``."""

    R: float
    B: float
    x: float
    n: int


def rb(n: int, x: float) -> RBPair:
    return RBPair((1 + x) ** n - (1 - x) ** n, (1 + x) ** n + (1 - x) ** n, x, n)


@dataclass(frozen=True)
class AbsorptionQuery:
    """A single absorption question.

    ``amplitudes`` is the internal state at ``m``; ``n=None`` is the
    semi-infinite lattice.
    """

    walk: str
    m: int
    n: Optional[int] = None
    amplitudes: Tuple[complex, ...] = (1.0,)
    coin: Optional[CoinSpec] = None
    p: Optional[float] = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.walk == "classical":
            return
        if abs(np.vdot(amps, amps).real - 1) > 1e-12:
            raise ConfigurationError("internal amplitudes must have unit norm")
        want = {"two-state": 2, "grover3": 3}.get(self.walk)
        if want is None:
            raise ConfigurationError(f"unknown walk {self.walk!r}")
        if amps.size != want:
            raise ConfigurationError(f"{self.walk} needs {want} internal amplitudes")
        if self.m < 1 or (self.n is not None and self.m >= self.n):
            raise ConfigurationError(f"need 1 <= m < n, got m={self.m}, n={self.n}")


@dataclass(frozen=True)
class TwoStateComponents:
    """``P(1,0)``, ``P(0,1)`` and the cross term ``H``."""

    p10: float
    p01: float
    h: complex

    def combine(self, alpha: complex, beta: complex) -> float:
        return float(abs(alpha) ** 2 * self.p10 + abs(beta) ** 2 * self.p01
                     + 2 * (alpha * np.conj(beta) * self.h).real)


def _coin_ab(coin: CoinSpec) -> Tuple[complex, complex]:
    if coin is None or coin.kind != TWO_STATE:
        raise ConfigurationError("a two-state coin is required")
    return complex(coin.a), complex(coin.b)


# cross-term normalization fixed by two-step enumeration at m=1, n=2
H_KAPPA = 0.5


def two_state_finite_components(coin: CoinSpec, m: int, n: int) -> TwoStateComponents:
    """Components of the left absorption probability on ``{0, ..., n}``."""
    if not 1 <= m < n:
        raise ConfigurationError(f"need 1 <= m < n, got m={m}, n={n}")
    a, b = _coin_ab(coin)
    x = abs(b)
    s = PowerPair(1 + x, 1 - x)
    p10 = x / 2 * s.ratio([("F", n - m), ("B", m - 1)], [("B", n - 1)])
    w = s.ratio([("B", n - m - 1), ("B", m - 1)], [("B", n - 1)]) if m < n else 0.0
    xr = s.ratio([("F", n - m - 1), ("F", m)], [("B", n - 1)])
    p01 = 0.5 * (xr + abs(a) ** 2 * w)
    h = -H_KAPPA * a * np.conj(b) * w
    return TwoStateComponents(float(p10), float(p01), complex(h))


def two_state_finite_closed(query: AbsorptionQuery) -> Tuple[float, TwoStateComponents]:
    """Left absorption probability for a two-state query on a finite lattice."""
    if query.walk != "two-state" or query.n is None:
        raise ConfigurationError("two_state_finite_closed needs a finite two-state query")
    comps = two_state_finite_components(query.coin, query.m, query.n)
    alpha, beta = query.amplitudes
    return comps.combine(alpha, beta), comps


@dataclass(frozen=True)
class SemiClosed:
    value: float
    trig_value: float
    degenerate: bool = False


def two_state_semi_closed(coin: CoinSpec) -> SemiClosed:
    """``P_inf^(1)(1,0)`` in the arccos form and the trigonometric form.

    With ``|a| = cos(phi)`` the trigonometric form is
    ``(sin 2phi - 2 phi cos 2phi) / (pi sin^2 phi)``.  ``b = 0`` never
    reaches the boundary and is flagged degenerate.
    """
    a, b = _coin_ab(coin)
    aa, bb = abs(a), abs(b)
    if bb == 0:
        return SemiClosed(0.0, 0.0, True)
    val = 2 / (math.pi * bb * bb) * ((bb * bb - aa * aa) * math.acos(min(aa, 1.0)) + aa * bb)
    phi = math.acos(min(aa, 1.0))
    trig = (math.sin(2 * phi) - 2 * phi * math.cos(2 * phi)) / (math.pi * math.sin(phi) ** 2)
    return SemiClosed(val, trig)


def two_state_semi_trig_printed(phi: float) -> float:
    """Trigonometric form with ``+2 phi cos 2phi``; agrees only at ``phi = pi/4``."""
    return (math.sin(2 * phi) + 2 * phi * math.cos(2 * phi)) / (math.pi * math.sin(phi) ** 2)


def first_step_relation(coin: CoinSpec, alpha: complex, beta: complex, p10: float) -> float:
    """``P^(1)(alpha, beta)`` from ``P^(1)(1,0)``: ``1 - |a alpha + b beta|^2 / |a|^2 (1 - p10)``.

    Valid for finite and semi-infinite lattices alike.
    """
    a, b = _coin_ab(coin)
    return float(1 - abs(a * alpha + b * beta) ** 2 / abs(a) ** 2 * (1 - p10))


def two_state_semi_probability(coin: CoinSpec, alpha: complex = 1.0, beta: complex = 0.0) -> float:
    """``P_inf^(1)(alpha, beta)``."""
    a, _ = _coin_ab(coin)
    p10 = two_state_semi_closed(coin).value
    if a == 0:
        return float(abs(-np.conj(coin.b) * alpha + np.conj(a) * beta) ** 2)
    return first_step_relation(coin, alpha, beta, p10)


def two_state_limits(coin: CoinSpec, m: Optional[int] = None, mode: str = "fixed_m",
                     c: Optional[float] = None) -> float:
    """``lim_n P_n^(m)(1,0)`` (``mode="fixed_m"``) or ``lim_n P_n^(cn)(1,0)``
    (``mode="ray_c"``)."""
    _, b = _coin_ab(coin)
    x = abs(b)
    if mode == "ray_c":
        if c is None or not 0 < c < 1:
            raise ConfigurationError("ray limit needs 0 < c < 1")
        return x / 2
    if mode != "fixed_m" or m is None or m < 1:
        raise ConfigurationError("fixed_m limit needs m >= 1")
    rho = (1 - x) / (1 + x)
    return x / 2 * (1 + rho ** (m - 1))


def mirrored_coin(coin: CoinSpec) -> CoinSpec:
    """``(conj(a), -conj(b))``: the coin seen by the mirror-image walk."""
    a, b = _coin_ab(coin)
    return CoinSpec.two_state(np.conj(a), -np.conj(b))


def two_state_conservation(query: AbsorptionQuery) -> Tuple[float, float, float]:
    """(left, right, left + right) with right from the mirrored query."""
    left, _ = two_state_finite_closed(query)
    alpha, beta = query.amplitudes
    mirror = AbsorptionQuery("two-state", query.n - query.m, query.n, (beta, alpha),
                             mirrored_coin(query.coin))
    right, _ = two_state_finite_closed(mirror)
    return left, right, left + right


def lattice_recurrence_printed(x: float, prev: float) -> float:
    return (x + prev) / (1 + prev)


def lattice_recurrence_corrected(x: float, prev: float) -> float:
    return (x * x + prev) / (1 + prev)


@dataclass
class RecurrenceReport:
    residuals: Dict[str, float] = field(default_factory=dict)
    notes: Dict[str, str] = field(default_factory=dict)


def two_state_recurrences(coin: CoinSpec, n_max: int = 50, n_pos: int = 20,
                          samples: Sequence[Tuple[complex, complex]] = ()) -> RecurrenceReport:
    """Residuals of the lattice-size and position recurrences against the
    closed form.

    ``lattice_corrected`` / ``lattice_printed``: max error of one step of each
    lattice recurrence over ``2 <= n < n_max``.  ``position``: max relative
    residual of the third-order position recurrence at lattice ``n_pos``.
    ``first_step``: max error of :func:`first_step_relation` over ``samples``.
    """
    _, b = _coin_ab(coin)
    a = complex(coin.a)
    x = abs(b)
    rep = RecurrenceReport()
    p1 = {n: two_state_finite_components(coin, 1, n).p10 for n in range(2, n_max + 1)}
    rep.residuals["lattice_corrected"] = max(abs(p1[n + 1] - lattice_recurrence_corrected(x, p1[n]))
                                             for n in range(2, n_max))
    rep.residuals["lattice_printed"] = max(abs(p1[n + 1] - lattice_recurrence_printed(x, p1[n]))
                                           for n in range(2, n_max))
    k = 4 / abs(a) ** 2 - 1
    worst = 0.0
    comps = [two_state_finite_components(coin, m, n_pos) for m in range(1, n_pos)]
    amp_grid = list(samples) or [(1.0, 0.0), (0.0, 1.0), (1 / math.sqrt(2), 1j / math.sqrt(2))]
    for alpha, beta in amp_grid:
        pm = [c.combine(alpha, beta) for c in comps]
        for i in range(len(pm) - 3):
            terms = (pm[i + 3], -k * pm[i + 2], k * pm[i + 1], -pm[i])
            scale = sum(abs(t) for t in terms) or 1.0
            worst = max(worst, abs(sum(terms)) / scale)
    rep.residuals["position"] = worst
    fs = 0.0
    for n in range(2, min(n_max, 30) + 1):
        comp = two_state_finite_components(coin, 1, n)
        for alpha, beta in amp_grid:
            fs = max(fs, abs(comp.combine(alpha, beta) - first_step_relation(coin, alpha, beta, comp.p10)))
    rep.residuals["first_step"] = fs
    return rep


# --------------------------------------------------------------------------- #
#                                Grover3 walk                                 #
# --------------------------------------------------------------------------- #


def grover3_semi_closed() -> float:
    """``P_inf^(1)(1,0,0) = 5 sqrt2 / (2 pi) - 3 arccsc(3) / (4 pi) - 3/8``."""
    return GROVER3_SEMI_VALUE


def grover3_delta(z) -> Tuple[complex, complex]:
    """``delta_pm = (-(3z^2+4z+3) pm sqrt((3z^2+4z+3)^2 - 4z^2)) / 2``
    with the principal square root."""
    z = complex(z)
    t = 3 * z * z + 4 * z + 3
    s = np.sqrt(complex(t * t - 4 * z * z))
    return (-t + s) / 2, (-t - s) / 2


@dataclass(frozen=True)
class Grover3ClosedFormParams:
    omega: complex = OMEGA

    def pair(self, z) -> PowerPair:
        return PowerPair(*grover3_delta(z))

    def F(self, n: int, z) -> complex:
        dp, dm = grover3_delta(z)
        return dp ** n - dm ** n

    def B(self, n: int, z) -> complex:
        dp, dm = grover3_delta(z)
        return dp ** n + dm ** n


def grover3_finite_closed(m: int, n: int) -> float:
    """``P_n^(m)(1,0,0)``: absorption at 0 from ``|m>|R>`` on ``{0, ..., n}``.

    The first term (a ratio of ``F(1)`` values) vanishes at ``m = 1`` and
    carries the localized mass for ``m >= 2``.
    """
    if not 1 <= m < n:
        raise ConfigurationError(f"need 1 <= m < n, got m={m}, n={n}")
    at1 = PowerPair(*grover3_delta(1.0))
    atw = PowerPair(*grover3_delta(OMEGA))
    loc = at1.ratio([("F", n - m), ("F", m - 1)], [("F", n - 1)]) / math.sqrt(6)
    prop = atw.ratio([("F", n - m), ("B", m - 1)], [("B", n - 1)]) / math.sqrt(2)
    val = 0.5 * (loc - prop)
    if abs(np.imag(val)) > 1e-10:
        raise IntegrityError(f"Grover3 closed form has imaginary part {np.imag(val):.3g}")
    return float(np.real(val))


def grover3_orbit(n_max: int) -> List[float]:
    """``P_n^(1)`` for ``n = 1..n_max`` from ``P_(n+1) = (2 + 3P_n)/(3 + 4P_n)``, ``P_1 = 0``."""
    out = [0.0]
    while len(out) < n_max:
        p = out[-1]
        out.append((2 + 3 * p) / (3 + 4 * p))
    return out


def grover3_recurrences(n_max: int = 50, n_pos: int = 40, m_max: int = 30,
                        hadamard_n: int = 30) -> RecurrenceReport:
    """Residuals of the lattice recurrence, the sixth-order position
    recurrence and the identity ``b_n = a_(2n-1)`` (Hadamard coin ``a``)."""
    rep = RecurrenceReport()
    orbit = grover3_orbit(n_max)
    rep.residuals["lattice"] = max(abs(orbit[n - 1] - grover3_finite_closed(1, n))
                                   for n in range(2, n_max + 1))
    pm = [grover3_finite_closed(m, n_pos) for m in range(1, n_pos)]
    worst = 0.0
    for i in range(min(m_max, len(pm) - 6)):
        terms = [c * pm[i + j] for j, c in enumerate(reversed(EQ56_COEFFS))]
        worst = max(worst, abs(sum(terms)) / sum(abs(t) for t in terms))
    rep.residuals["position"] = worst
    h = CoinSpec.hadamard()
    rep.residuals["hadamard_interleave"] = max(
        abs(grover3_finite_closed(1, n) - two_state_finite_components(h, 1, 2 * n - 1).p10)
        for n in range(2, hadamard_n + 1))
    return rep


# --------------------------------------------------------------------------- #
#                          Reflection inequalities                            #
# --------------------------------------------------------------------------- #


@dataclass
class ReflectionReport:
    asserted_violations: List[tuple] = field(default_factory=list)
    min_gap: float = math.inf
    grover3_margin: float = math.nan
    conjecture_violations: List[tuple] = field(default_factory=list)
    conjecture_min_gap: float = math.inf
    localization_sums: List[float] = field(default_factory=list)
    localization_max: float = math.nan
    crossover: Dict[tuple, int] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return not self.asserted_violations


def internal_state_grid(count: int = 20, seed: int = 7) -> List[Tuple[complex, complex]]:
    """Deterministic unit vectors in C^2, including the two basis states."""
    rng = np.random.default_rng(seed)
    out = [(1.0 + 0j, 0j), (0j, 1.0 + 0j)]
    while len(out) < count:
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = v / np.linalg.norm(v)
        out.append((complex(v[0]), complex(v[1])))
    return out


def reflection_inequality_suite(coins: Sequence[CoinSpec], n_values: Sequence[int] = range(2, 101),
                                states: Optional[Sequence[Tuple[complex, complex]]] = None,
                                conjecture_m: Sequence[int] = (),
                                semi_components=None,
                                fig4_n: int = 50, fig4_right=None,
                                tol: float = 1e-12) -> ReflectionReport:
    """Check ``P_inf^(1)(alpha,beta) <= P_n^(1)(alpha,beta)`` on the grid.

    ``crossover[(a, b)]`` is the smallest grid ``n`` from which on the
    inequality holds for every sampled state; for small ``n`` it can fail
    (``P_2^(1)(1,0) = |b|^2`` lies below the semi-infinite value).

    Exploratory parts are recorded, never asserted:

    * ``conjecture_m``: the same inequality for ``m >= 2``; needs
      ``semi_components(coin, m) -> TwoStateComponents`` (numerical).
    * ``fig4_right(m, n) -> P_n^(n-m)(0,0,1)`` fills ``localization_sums``
      with ``P_n^(m)(1,0,0) + P_n^(n-m)(0,0,1)`` for ``m = 1..n-1``.
    """
    states = list(states) if states is not None else internal_state_grid()
    rep = ReflectionReport()
    n_values = list(n_values)
    for coin in coins:
        last_bad = None
        for alpha, beta in states:
            p_inf = two_state_semi_probability(coin, alpha, beta)
            for n in n_values:
                p_n = two_state_finite_components(coin, 1, n).combine(alpha, beta)
                gap = p_n - p_inf
                rep.min_gap = min(rep.min_gap, gap)
                if gap < -tol:
                    rep.asserted_violations.append((coin.a, coin.b, alpha, beta, n, gap))
                    last_bad = n if last_bad is None else max(last_bad, n)
        later = [n for n in n_values if last_bad is None or n > last_bad]
        rep.crossover[(coin.a, coin.b)] = min(later) if later else -1
        for m in conjecture_m:
            if semi_components is None:
                break
            comps = semi_components(coin, m)
            for alpha, beta in states:
                p_inf = comps.combine(alpha, beta)
                for n in n_values:
                    if n <= m:
                        continue
                    gap = two_state_finite_components(coin, m, n).combine(alpha, beta) - p_inf
                    rep.conjecture_min_gap = min(rep.conjecture_min_gap, gap)
                    if gap < -1e-6:
                        rep.conjecture_violations.append((coin.a, coin.b, m, alpha, beta, n, gap))
    rep.grover3_margin = grover3_finite_closed(1, 4000) - grover3_semi_closed()
    if fig4_right is not None:
        rep.localization_sums = [grover3_finite_closed(m, fig4_n) + fig4_right(m, fig4_n)
                                 for m in range(1, fig4_n)]
        rep.localization_max = max(rep.localization_sums)
    return rep
