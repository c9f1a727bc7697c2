"""Verification suites: every invariant as a JSON-serializable record.

A record with ``expect="fail"`` documents a known-wrong published formula;
it passes when the formula is demonstrably wrong.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from . import closed_forms as cf
from . import genfun as gf
from . import grover2d as g2
from .hadamard import handle_probability
from .walk import (AbsorberSet, CoinSpec, DirectionSet, WalkState, brute_force_amplitude,
                   classical_absorption, evolve_matrix_element, run_absorbing)

SUITES = ("classical", "two-state", "grover3", "grover2d", "oracle", "discrepancies")
COIN_WEIGHTS = (0.2, 0.35, 0.5, 0.65, 0.8)


@dataclass
class Record:
    suite: str
    check: str
    observed: float
    threshold: float
    passed: bool
    expect: str = "pass"
    detail: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["observed"] = _jsonable(d["observed"])
        return d


def _jsonable(v):
    if isinstance(v, (float, np.floating)) and not math.isfinite(v):
        return str(v)
    return float(v) if isinstance(v, (np.floating, np.integer)) else v


def _rec(suite, check, observed, threshold, **detail) -> Record:
    observed = float(observed)
    return Record(suite, check, observed, threshold, bool(observed <= threshold), detail=detail)


def _expected_failure(suite, check, observed, threshold, **detail) -> Record:
    observed = float(observed)
    return Record(suite, check, observed, threshold, bool(observed > threshold), "fail", detail)


def coin_grid() -> List[CoinSpec]:
    """Two-state coins with the standard weights and fixed non-trivial phases."""
    return [CoinSpec.from_weight(w, 0.3 * k, -0.7 + 0.5 * k) for k, w in enumerate(COIN_WEIGHTS)]


def simulate_line(coin: CoinSpec, amplitudes, m: int, n: Optional[int], max_steps: int = 20000,
                  residual_tol: float = 1e-12, stall_tol: Optional[float] = 1e-15):
    """Left absorption on the line (two-state or Grover3 coin)."""
    dirs = DirectionSet.line() if coin.size == 2 else DirectionSet.line_with_stay()
    absorbers = AbsorberSet.points(0) if n is None else AbsorberSet.interval(n)
    engine = "dense" if n is not None else "sparse"
    return run_absorbing(WalkState.superposition(m, amplitudes), coin, dirs, absorbers,
                         tracked=[0], max_steps=max_steps, residual_tol=residual_tol,
                         stall_tol=stall_tol, engine=engine)


# --------------------------------------------------------------------------- #


def suite_classical(n_max: int = 30) -> List[Record]:
    s = "classical"
    out = []
    err = 0.0
    rec_err = 0.0
    for p in (0.3, 0.5, 0.7):
        q = 1 - p
        for n in range(2, n_max + 1):
            chain = [classical_absorption(p, q, m, n) for m in range(1, n)]
            for m in range(1, n):
                err = max(err, abs(chain[m - 1] - cf.classical_closed(p, q, m, n)))
            for i in range(len(chain) - 2):
                rec_err = max(rec_err, abs(chain[i + 2] - chain[i + 1] / p + q / p * chain[i]))
        one = {n: classical_absorption(p, q, 1, n) for n in range(2, n_max + 1)}
        for n in range(2, n_max):
            rec_err = max(rec_err, abs(one[n + 1] - q / (1 - p * one[n])))
    out.append(_rec(s, "finite closed form vs Markov chain", err, 1e-12))
    out.append(_rec(s, "lattice/product/position recurrences vs Markov chain", rec_err, 1e-12))
    semi = max(abs(classical_absorption(p, 1 - p, m) - cf.classical_closed(p, 1 - p, m))
               for p in (0.3, 0.5, 0.7) for m in (1, 2, 5))
    out.append(_rec(s, "semi-infinite closed form vs Markov chain", semi, 1e-12))
    ray = 0.0
    for p in (0.3, 0.5, 0.7):
        for c in (0.25, 0.5, 0.75):
            n = 400
            ray = max(ray, abs(classical_absorption(p, 1 - p, cf.ray_position(c, n), n)
                               - cf.classical_ray_limit(p, 1 - p, c)))
    out.append(_rec(s, "ray limit vs Markov chain at n=400", ray, 1e-12))
    return out


def suite_two_state(sim_n_max: int = 8) -> List[Record]:
    s = "two-state"
    out = []
    coins = coin_grid() + [CoinSpec.hadamard()]
    # conservation on 50 cases
    rng = np.random.default_rng(42)
    worst = 0.0
    for k in range(50):
        coin = coins[k % len(coins)]
        n = int(rng.integers(2, 40))
        m = int(rng.integers(1, n))
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        q = cf.AbsorptionQuery("two-state", m, n, tuple(v), coin)
        worst = max(worst, abs(cf.two_state_conservation(q)[2] - 1))
    out.append(_rec(s, "left + mirrored right = 1 (50 cases)", worst, 1e-12))
    pos = max(cf.two_state_recurrences(c, n_pos=20).residuals["position"] for c in coins)
    out.append(_rec(s, "third-order position recurrence, n=20", pos, 1e-8))
    lat = max(cf.two_state_recurrences(c, n_max=50).residuals["lattice_corrected"] for c in coins)
    out.append(_rec(s, "lattice recurrence (|b|^2 + P)/(1 + P), n<=50", lat, 1e-12))
    fs = max(cf.two_state_recurrences(c).residuals["first_step"] for c in coins)
    out.append(_rec(s, "first-step linear relation", fs, 1e-12))
    refl = cf.reflection_inequality_suite(coins)
    cross = max(refl.crossover.values())
    late = [v for v in refl.asserted_violations if v[4] >= cross]
    out.append(_rec(s, "semi-infinite <= finite (m=1) beyond crossover", len(late), 0,
                    crossover=cross))
    lim_gap = min(abs(c.b) - cf.two_state_semi_closed(c).value for c in coins)
    out.append(Record(s, "semi-infinite < finite limit |b|", lim_gap, 0.0, lim_gap > 0))
    h = CoinSpec.hadamard()
    lim = abs(cf.two_state_finite_components(h, 1, 4000).p10 - 1 / math.sqrt(2))
    out.append(_rec(s, "Hadamard P_4000^(1) vs 1/sqrt2", lim, 1e-4))
    lim2 = abs(cf.two_state_finite_components(h, 2, 4000).p10 - cf.two_state_limits(h, 2))
    out.append(_rec(s, "Hadamard m=2 limit vs n=4000", lim2, 1e-4))
    semi = max(abs(handle_probability(gf.GenFunHandle("two-state-semi", "r", 1, coin=c)).value
                   - cf.two_state_semi_closed(c).value) for c in coins)
    out.append(_rec(s, "semi-infinite closed form vs quadrature", semi, 1e-5))
    phase = 0.0
    rng = np.random.default_rng(3)
    for _ in range(8):
        pa, pb = rng.uniform(0, 2 * np.pi, 2)
        c0, c1 = CoinSpec.from_weight(0.35), CoinSpec.from_weight(0.35, pa, pb)
        for m, n in ((1, 5), (3, 9)):
            a0 = cf.two_state_finite_components(c0, m, n)
            a1 = cf.two_state_finite_components(c1, m, n)
            phase = max(phase, abs(a0.p10 - a1.p10), abs(a0.p01 - a1.p01), abs(abs(a0.h) - abs(a1.h)))
    out.append(_rec(s, "phase invariance of components", phase, 1e-14))
    sim = 0.0
    for coin in coins[:5]:
        for n in range(2, sim_n_max + 1):
            for m in range(1, n):
                amps = (0.6, 0.8j)
                rep = simulate_line(coin, amps, m, n)
                sim = max(sim, abs(rep.probability - cf.two_state_finite_components(coin, m, n).combine(*amps)))
    out.append(_rec(s, f"closed form vs simulation, n<={sim_n_max}", sim, 1e-8))
    return out


def suite_grover3(sim_n_max: int = 8) -> List[Record]:
    s = "grover3"
    out = []
    out.append(_rec(s, "closed constant vs 0.6693", abs(round(cf.grover3_semi_closed(), 4) - 0.6693), 0))
    q = handle_probability(gf.GenFunHandle("grover3-semi", "r", 1)).value
    out.append(_rec(s, "closed constant vs quadrature", abs(q - cf.grover3_semi_closed()), 1e-4))
    rec = cf.grover3_recurrences()
    out.append(_rec(s, "lattice orbit vs closed form", rec.residuals["lattice"], 1e-12))
    out.append(_rec(s, "sixth-order position recurrence, n=40", rec.residuals["position"], 1e-8))
    out.append(_rec(s, "b_n = a_(2n-1), n<=30", rec.residuals["hadamard_interleave"], 1e-12))
    margin = cf.grover3_finite_closed(1, 4000) - cf.grover3_semi_closed()
    out.append(Record(s, "finite limit exceeds semi-infinite", margin, 0.0, margin > 0,
                      detail={"margin": margin}))
    sim = 0.0
    g = CoinSpec.grover3()
    for n in range(2, sim_n_max + 1):
        for m in range(1, n):
            rep = simulate_line(g, (1, 0, 0), m, n)
            sim = max(sim, abs(rep.probability - cf.grover3_finite_closed(m, n)))
    out.append(_rec(s, f"closed form vs simulation, n<={sim_n_max}", sim, 1e-8))
    return out


def suite_grover2d(theta_nodes: int = 128, sim_steps: int = 600) -> List[Record]:
    s = "grover2d"
    out = []
    th = np.linspace(-np.pi, np.pi, 32)[:, None]
    z = (np.linspace(0.05, 1, 32) * np.exp(1j * np.linspace(0, 2 * np.pi, 32, endpoint=False)))[None, :]
    out.append(_rec(s, "momentum system residual", g2.system_residual(th, z).max(), 1e-10))
    seg = 0.0
    for m in range(2, 5):
        for t in np.linspace(0, np.pi, 7):
            F = g2.solve_momentum_system(t, z.ravel())
            seg = max(seg, np.abs(g2.MomentumGenFun(float(t), "S+1", m)(z.ravel()) - F[0] * F[1] ** (m - 1)).max())
    out.append(_rec(s, "segmenting identity m<=4", seg, 1e-10))
    out.append(_rec(s, "single-wall coefficients vs simulation, t<=14", g2.coefficient_mismatch(None, 14), 1e-8))
    out.append(_rec(s, "finite-wall coefficients vs simulation, n=3, t<=12", g2.coefficient_mismatch(3, 12), 1e-8))
    mom = g2.wall_absorption_semi(1, theta_nodes)
    out.append(Record(s, "momentum P_inf in [0.636, 0.656]", mom.value, 0.656,
                      0.636 <= mom.value <= 0.656, detail={"error": mom.error}))
    sim = g2.simulate_wall(1, None, sim_steps, 121)
    out.append(_rec(s, "momentum vs simulation (width 121)", abs(mom.value - sim.probability), 1e-2,
                    simulation=sim.probability, momentum=mom.value))
    return out


def suite_oracle(t_max: int = 10) -> List[Record]:
    s = "oracle"
    cases = []
    for coin in coin_grid():
        cases.append((coin, DirectionSet.line(), (1,), AbsorberSet.interval(3)))
    cases.append((CoinSpec.grover3(), DirectionSet.line_with_stay(), (1,), AbsorberSet.interval(4)))
    cases.append((CoinSpec.grover(2), DirectionSet.lattice(2), (1, 0), AbsorberSet.walls(0)))
    worst = 0.0
    for coin, dirs, start, absorbers in cases:
        k = len(dirs)
        for t in range(1, t_max + 1):
            targets = [((0,) + (0,) * (len(start) - 1), k - 1 if len(start) == 1 else 1),
                       (start, 0)]
            for target in targets:
                for absorbed in (False, True):
                    bf = brute_force_amplitude((start, 0), target, coin, dirs, absorbers, t, absorbed)
                    ev = evolve_matrix_element((start, 0), target, coin, dirs, absorbers, t, absorbed)
                    worst = max(worst, abs(bf - ev))
    return [_rec(s, "path sum vs operator evolution", worst, 1e-12)]


def suite_discrepancies() -> List[Record]:
    s = "discrepancies"
    out = []
    h = CoinSpec.hadamard()
    x = abs(h.b)
    p3 = cf.two_state_finite_components(h, 1, 3).p10
    out.append(_expected_failure(s, "printed lattice recurrence (|b| + P)/(1 + P) at n=3",
                                 abs(cf.lattice_recurrence_printed(x, 0.5) - p3), 1e-6,
                                 printed=cf.lattice_recurrence_printed(x, 0.5), closed=p3))
    out.append(_rec(s, "corrected lattice recurrence at n=3",
                    abs(cf.lattice_recurrence_corrected(x, 0.5) - p3), 1e-12))
    # cross term normalization from two-step enumeration at m=1, n=2
    c = CoinSpec.from_weight(0.35, 0.4, -1.1)
    alpha, beta = 0.6, 0.8j
    enumerated = abs(-np.conj(c.b) * alpha + np.conj(c.a) * beta) ** 2
    comp = cf.two_state_finite_components(c, 1, 2)
    unit = cf.TwoStateComponents(comp.p10, comp.p01, comp.h / cf.H_KAPPA)
    out.append(_expected_failure(s, "cross term with kappa=1", abs(unit.combine(alpha, beta) - enumerated), 1e-6))
    out.append(_rec(s, "cross term with kappa=1/2", abs(comp.combine(alpha, beta) - enumerated), 1e-12))
    phi = math.acos(math.sqrt(0.3))
    out.append(_expected_failure(s, "printed trigonometric semi-infinite form",
                                 abs(cf.two_state_semi_trig_printed(phi)
                                     - cf.two_state_semi_closed(CoinSpec.from_weight(0.3)).value), 1e-6))
    zz = 0.6 * np.exp(1j * np.linspace(0.1, 6.0, 17))
    out.append(_expected_failure(s, "printed Grover3 semi-infinite r",
                                 np.abs(gf.grover3_semi_printed("r", zz) - gf.grover3_semi("r", 1, zz)).max(), 1e-6))
    th = np.linspace(0.1, 3.0, 9)[:, None]
    zc = zz[None, :]
    out.append(_expected_failure(s, "printed 2D single-wall closed form",
                                 np.abs(g2.f_plus_printed(th, zc) - g2.f_plus(th, zc)).max(), 1e-6,
                                 ratio=float(np.median(np.abs(g2.f_plus_printed(th, zc) / g2.f_plus(th, zc))))))
    refl = cf.reflection_inequality_suite([CoinSpec.hadamard()], n_values=[2])
    out.append(_expected_failure(s, "semi-infinite <= finite at n=2 (Hadamard)", -refl.min_gap, 0.0))
    out.append(_expected_failure(s, "printed 2D finite-wall recursion, n=3",
                                 g2.coefficient_mismatch(3, 8, printed=True), 1e-6))
    return out


SUITE_FUNCS: Dict[str, Callable[[], List[Record]]] = {
    "classical": suite_classical,
    "two-state": suite_two_state,
    "grover3": suite_grover3,
    "grover2d": suite_grover2d,
    "oracle": suite_oracle,
    "discrepancies": suite_discrepancies,
}


def run_suites(names: Iterable[str]) -> List[Record]:
    names = list(names)
    if "all" in names:
        names = list(SUITES)
    out: List[Record] = []
    for n in names:
        if n not in SUITE_FUNCS:
            from .errors import ConfigurationError
            raise ConfigurationError(f"unknown suite {n!r}; choose from {('all',) + SUITES}")
        out.extend(SUITE_FUNCS[n]())
    return out
