"""Absorption of the two-dimensional Grover walk by a wall ``x_1 = 0``.

The walk starts at ``(m, 0)`` moving along ``S+1`` (away from the wall).
Fourier transforming along the wall, ``F(z, theta) = sum_x f_x(z) e^(i x theta)``,
reduces the problem to four momentum functions per ``theta``; ``f_x(z)`` is the
generating function of the amplitude absorbed at wall site ``(0, x)``.

A move along ``S+2`` shifts the wall site by ``+1`` and so multiplies the
transform by ``e^(+i theta)``.  With ``c = cos(theta)``,
``D = z^2 + 2cz + 1`` and ``N = z^4 + c(z^3 + z) + 1``:

    F_{S+1}(z, theta) = z D / (N + s),
    s = (1 - z^2) sqrt(z^2 + (c-1) z + 1) sqrt(z^2 + (c+1) z + 1),

using ``N^2 - z^2 D^2 = (z^2-1)^2 (z^2+(c-1)z+1)(z^2+(c+1)z+1)``; both square
roots are analytic on the open unit disk.  Absorbed probabilities are
``mean |F|^2`` over the torus ``|z| = 1``, ``theta in [-pi, pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import BranchError, ConfigurationError
from .genfun import LFCoefficients, _sqrt_unit_quadratic, solve_linear_fractional
from .hadamard import ContourSpec, hadamard_at_one
from .walk import (AbsorberSet, CoinSpec, DirectionSet, WalkState, absorbed_amplitudes,
                   run_absorbing)

COMPONENTS = ("S+1", "S-1", "S+2", "S-2")
SYSTEM_TOL = 1e-10
DENOM_TOL = 1e-12


def _dn(z, c):
    return z * z + 2 * c * z + 1, z ** 4 + c * (z ** 3 + z) + 1


def _sqrt_disc(z, c):
    """``(1 - z^2) sqrt(z^2+(c-1)z+1) sqrt(z^2+(c+1)z+1)``, analytic in ``|z| < 1``."""
    return (1 - z * z) * _sqrt_unit_quadratic(c - 1, z) * _sqrt_unit_quadratic(c + 1, z)


def _perturb(z, den, shift: float = 1e-9):
    bad = np.abs(den) < DENOM_TOL
    return np.where(bad, z * (1 - shift), z), bool(np.any(bad))


def f_plus(theta, z):
    """``F_{S+1}(z, theta)`` for a single wall at distance 1."""
    z = np.asarray(z, dtype=complex)
    c = np.cos(np.asarray(theta, dtype=float))
    d, n = _dn(z, c)
    den = n + _sqrt_disc(z, c)
    z, _ = _perturb(z, den)
    d, n = _dn(z, c)
    return z * d / (n + _sqrt_disc(z, c))


def f_plus_printed(theta, z, sign: int = -1):
    """The displayed ``(2N +- 2 sqrt(N^2 - z^2 D^2)) / (z D)`` with principal
    square root; twice the true function on the branch with zero constant term."""
    z = np.asarray(z, dtype=complex)
    c = np.cos(np.asarray(theta, dtype=float))
    d, n = _dn(z, c)
    root = np.sqrt((z * z - 1) ** 2 * (z * z + z * (c - 1) + 1) * (z * z + z * (c + 1) + 1))
    return (2 * n + sign * 2 * root) / (z * d)


def components_from_f(theta, z, f):
    """The other three momentum functions given ``F_{S+1}`` (any wall setup
    whose first step is the same)."""
    z = np.asarray(z, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    d, _ = _dn(z, c)
    den = f * z * d - 2 * c * z - 2
    fm1 = -z * (z * z - 1) / den
    fp2 = z * (f * z - 1) * (np.exp(-1j * theta) * z + 1) / den
    fm2 = z * (f * z - 1) * (np.exp(1j * theta) * z + 1) / den
    return fm1, fp2, fm2


def solve_momentum_system(theta, z) -> np.ndarray:
    """``[F_{S+1}, F_{S-1}, F_{S+2}, F_{S-2}]`` stacked on a new leading axis."""
    f = f_plus(theta, z)
    return np.stack((f,) + components_from_f(theta, z, f))


def system_residual(theta, z, values=None) -> np.ndarray:
    """Max residual of the four first-step equations
    ``F_s = z [g(S-1,s) + g(S+1,s) F_{S+1} F_{S-1} + g(S+2,s) e^(i theta) F_{S+2}
    + g(S-2,s) e^(-i theta) F_{S-2}]`` with ``g(t, s) = 1/2 - [t == s]``."""
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=complex)
    F = solve_momentum_system(theta, z) if values is None else values
    g = 0.5 - np.eye(4)
    ep, em = np.exp(1j * theta), np.exp(-1j * theta)
    res = 0.0
    for s in range(4):
        rhs = z * (g[1, s] + g[0, s] * F[0] * F[1] + g[2, s] * ep * F[2] + g[3, s] * em * F[3])
        res = np.maximum(res, np.abs(F[s] - rhs))
    return res


def check_branch(theta_nodes: int = 16, radius: float = 0.5, nodes: int = 256,
                 tol: float = 1e-12) -> float:
    """Largest constant Taylor term of ``F_{S+1}`` over a theta grid; raises
    BranchError above ``tol``."""
    th = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    z = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    c0 = np.abs(np.mean(f_plus(th[:, None], z[None, :]), axis=1)).max()
    if c0 > tol:
        raise BranchError(f"F_S+1 constant term {c0:.3g}")
    return float(c0)


@dataclass(frozen=True)
class MomentumGenFun:
    """One momentum function at fixed ``theta``.

    ``component`` indexes ``COMPONENTS``; ``wall_n=None`` is the single wall.
    ``F^(m) = F^(1) (F_{S-1}^(1))^(m-1)``.
    """

    theta: float
    component: str = "S+1"
    m: int = 1
    wall_n: Optional[int] = None

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ConfigurationError(f"component must be one of {COMPONENTS}")
        if self.m < 1:
            raise ConfigurationError("m must be >= 1")
        if self.wall_n is not None and self.wall_n < 2:
            raise ConfigurationError("wall_n must be >= 2")
        if self.wall_n is not None and (self.m != 1 or self.component != "S+1"):
            raise ConfigurationError("finite walls are exposed for S+1, m=1 only")

    def __call__(self, z):
        if self.wall_n is not None:
            return wall_recursion_finite(self.wall_n, self.theta, z)
        F = solve_momentum_system(self.theta, z)
        k = COMPONENTS.index(self.component)
        return F[k] * F[1] ** (self.m - 1)


# --------------------------------------------------------------------------- #
#                          Finite walls {0, n}                                #
# --------------------------------------------------------------------------- #


def wall_coefficients(theta, printed: bool = False) -> LFCoefficients:
    """Coefficients of ``F_{n+1} = (a F_n + b) / (c F_n + d)`` for ``F_{S+1,n}``.

    ``printed=True`` gives ``a = z^3 (c + z)``, ``d = -(c + z)`` (fails the
    simulation oracle); the default is ``a = 2 z^3 (z + c)``,
    ``d = -2 (1 + c z)``.  Both share ``b = -z D`` and ``c = z D``.
    """
    cth = np.cos(np.asarray(theta, dtype=float))
    dfun = lambda z: z * z + 2 * cth * z + 1
    if printed:
        return LFCoefficients(lambda z: z ** 3 * (cth + z), lambda z: -z * dfun(z),
                              lambda z: z * dfun(z), lambda z: -(cth + z) + 0 * z)
    return LFCoefficients(lambda z: 2 * z ** 3 * (z + cth), lambda z: -z * dfun(z),
                          lambda z: z * dfun(z), lambda z: -2 * (1 + cth * z))


def wall_recursion_finite(n: int, theta, z, printed: bool = False, closed_form: bool = True):
    """``F_{S+1,n}(z, theta)`` for walls at 0 and ``n``, start ``(1, 0)``."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    coeffs = wall_coefficients(theta, printed)
    z = np.asarray(z, dtype=complex)
    if closed_form:
        return solve_linear_fractional(coeffs, n, z)
    return coeffs.iterate(n, z)


# --------------------------------------------------------------------------- #
#                          Probabilities by quadrature                        #
# --------------------------------------------------------------------------- #


def _theta_nodes(count: int) -> np.ndarray:
    """Midpoint nodes on ``[0, pi]``; by ``theta -> -theta`` symmetry these
    represent the full circle with equal weights."""
    return np.pi * (np.arange(count) + 0.5) / count


@dataclass
class WallEstimate:
    value: float
    error: float
    converged: bool
    theta_nodes: int
    per_theta: np.ndarray = field(repr=False, default=None)


def _per_theta(m: int, thetas, contour: ContourSpec, tol: float):
    vals, errs, ok = [], [], True
    for t in thetas:
        g = MomentumGenFun(float(t), "S+1", m)
        r = hadamard_at_one(g, lambda w, g=g: np.conj(g(1 / np.conj(w))), contour, tol)
        vals.append(r.value)
        errs.append(r.error)
        ok &= r.converged
    return np.array(vals), np.array(errs), ok


def wall_absorption_semi(m: int = 1, theta_nodes: int = 512,
                         contour: Optional[ContourSpec] = None, tol: float = 1e-7) -> WallEstimate:
    """``P_inf^(m)`` as the theta-average of per-theta Hadamard products.

    Each theta node runs the adaptive trapezoid of :func:`hadamard_at_one` on
    ``|z| = 1``.  The reported error adds the mean per-node error to the
    change against an independent rule with half the theta nodes.
    """
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    contour = contour or ContourSpec(1.0, 1024, 6)
    vals, errs, ok = _per_theta(m, _theta_nodes(theta_nodes), contour, tol)
    half, _, _ = _per_theta(m, _theta_nodes(max(1, theta_nodes // 2)), contour, tol)
    value = float(vals.mean())
    err = float(errs.mean() + abs(value - half.mean()))
    return WallEstimate(value, err, bool(ok), theta_nodes, vals)


def torus_mean_abs2(fn: Callable, theta_nodes: int, z_nodes: int, chunk: int = 64) -> float:
    """``mean |fn(theta, z)|^2`` over midpoint theta nodes on ``[0, pi]`` and
    ``z_nodes`` points of the unit circle."""
    th = _theta_nodes(theta_nodes)
    z = np.exp(2j * np.pi * (np.arange(z_nodes) + 0.5) / z_nodes)
    acc = 0.0
    for i in range(0, theta_nodes, chunk):
        blk = th[i:i + chunk, None]
        acc += float(np.sum(np.abs(fn(blk, z[None, :])) ** 2))
    return acc / (theta_nodes * z_nodes)


def wall_absorption_finite(n: int, theta_nodes: int = 256, z_nodes: int = 2048,
                           printed: bool = False) -> WallEstimate:
    """``P_n^(1)``: absorption at wall 0 before wall ``n`` from ``(1, 0)``.

    Error is the change against halving both node counts.
    """
    fn = lambda th, z: wall_recursion_finite(n, th, z, printed)
    fine = torus_mean_abs2(fn, theta_nodes, z_nodes)
    coarse = torus_mean_abs2(fn, theta_nodes // 2, z_nodes // 2)
    err = abs(fine - coarse)
    return WallEstimate(fine, err, err < 1e-6, theta_nodes)


# --------------------------------------------------------------------------- #
#                            Simulation oracle                                #
# --------------------------------------------------------------------------- #


def simulate_wall(m: int = 1, n: Optional[int] = None, steps: int = 600,
                  width: Optional[int] = 121, stall_tol: Optional[float] = None):
    """Direct 2D simulation from ``(m, 0)`` along ``S+1``.

    ``width`` wraps the transverse axis periodically (a wrapped strip of
    width ``W`` samples ``W`` equally spaced momenta); ``width=None`` keeps
    the exact light-cone box.  Returns the :class:`AbsorptionReport`
    tracking wall 0.
    """
    coin = CoinSpec.grover(2)
    dirs = DirectionSet.lattice(2)
    walls = AbsorberSet.walls(0) if n is None else AbsorberSet.walls(0, n)
    init = WalkState.basis((m, 0), dirs.index("S+1"))
    return run_absorbing(init, coin, dirs, walls, tracked=[0], max_steps=steps,
                         residual_tol=1e-14, stall_tol=stall_tol, engine="dense",
                         periodic_width=width)


def wall_amplitude_table(n: Optional[int], steps: int) -> np.ndarray:
    """Absorbed amplitudes ``a[t, x]`` at wall 0, direction ``S-1``, for
    ``t = 0..steps`` and transverse ``x = -steps..steps`` (exact light cone)."""
    coin = CoinSpec.grover(2)
    dirs = DirectionSet.lattice(2)
    walls = AbsorberSet.walls(0) if n is None else AbsorberSet.walls(0, n)
    init = WalkState.basis((1, 0), dirs.index("S+1"))
    amps = absorbed_amplitudes(init, coin, dirs, walls, steps, engine="dense")
    out = np.zeros((steps + 1, 2 * steps + 1), dtype=complex)
    sm1 = dirs.index("S-1")
    for t, hit in enumerate(amps, start=1):
        for (pos, s), v in hit.items():
            if pos[0] == 0:
                if s != sm1:
                    raise AssertionError("amplitude reached the wall moving away from it")
                out[t, pos[1] + steps] = v
    return out


def fourier_taylor_table(fn: Callable, steps: int, radius: float = 0.5,
                         theta_nodes: int = 64, z_nodes: int = 64) -> np.ndarray:
    """Coefficients ``c[t, x]`` of ``fn(theta, z) = sum c[t,x] z^t e^(i x theta)``
    for ``t <= steps``, ``|x| <= steps``."""
    th = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    w = radius * np.exp(2j * np.pi * np.arange(z_nodes) / z_nodes)
    vals = fn(th[:, None], w[None, :])
    # z: forward FFT picks z^t; theta: forward FFT picks e^(-i x theta), so x -> -x
    coef = np.fft.fft(np.fft.fft(vals, axis=1), axis=0) / (theta_nodes * z_nodes)
    coef = coef[:, :steps + 1] * radius ** -np.arange(steps + 1)
    xs = np.arange(-steps, steps + 1)
    return coef[(-xs) % theta_nodes, :].T


def coefficient_mismatch(n: Optional[int], steps: int, printed: bool = False) -> float:
    """Max ``|Fourier x Taylor coefficient - simulated amplitude|`` for
    ``t <= steps``; ``n=None`` uses the single-wall function."""
    if n is None:
        fn = lambda th, z: f_plus(th, z)
    else:
        fn = lambda th, z: wall_recursion_finite(n, th, z, printed)
    table = fourier_taylor_table(fn, steps, theta_nodes=max(64, 4 * steps))
    return float(np.abs(table - wall_amplitude_table(n, steps)).max())


# --------------------------------------------------------------------------- #
#                             Limit exploration                               #
# --------------------------------------------------------------------------- #


def fit_linear_fractional(seq: Sequence[float]):
    """Least-squares ``p_(k+1) = (alpha p_k + beta) / (gamma p_k + 1)``.

    Returns ``(alpha, beta, gamma, max_abs_residual)``.  The residual is near
    machine precision for sequences generated by such a map.
    """
    p = np.asarray(seq, dtype=float)
    if p.size < 4:
        raise ConfigurationError("need at least 4 terms")
    x, y = p[:-1], p[1:]
    A = np.column_stack([x, np.ones_like(x), -x * y])
    (alpha, beta, gamma), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = (alpha * x + beta) / (gamma * x + 1)
    return float(alpha), float(beta), float(gamma), float(np.abs(pred - y).max())


@dataclass
class ProbeReport:
    rows: List[Dict[str, float]]
    semi_infinite: float
    richardson_limit: float
    distance_to_two_thirds: float
    lf_fit_residual: float
    semi_below_finite: bool

    def table(self) -> str:
        lines = ["n,momentum,simulation,sim_residual"]
        for r in self.rows:
            lines.append(f"{r['n']},{r['momentum']:.10f},{r['simulation']:.10f},{r['sim_residual']:.3e}")
        lines.append(f"inf,{self.semi_infinite:.10f},,")
        lines.append(f"richardson,{self.richardson_limit:.10f},,")
        lines.append(f"target 2/3 distance,{self.distance_to_two_thirds:.3e},,")
        lines.append(f"linear-fractional fit residual,{self.lf_fit_residual:.3e},,")
        return "\n".join(lines)


def double_wall_limit_probe(n_list: Sequence[int] = tuple(range(2, 13)), budget: str = "small",
                       simulate: bool = True) -> ProbeReport:
    """Trend table for the double-wall probability ``P_n^(1)``.

    Nothing here is asserted.  ``budget`` picks quadrature and simulation
    sizes (``"small"`` or ``"large"``).  The Richardson estimate assumes
    ``P_n = L + A/n`` on the last two entries.
    """
    sizes = {"small": (128, 1024, 400, 121), "large": (512, 8192, 1500, 301)}
    if budget not in sizes:
        raise ConfigurationError(f"budget must be one of {sorted(sizes)}")
    tn, zn, steps, width = sizes[budget]
    rows = []
    for n in n_list:
        mom = wall_absorption_finite(n, tn, zn).value
        if simulate:
            rep = simulate_wall(1, n, steps, width)
            sim, res = rep.probability, rep.residual_mass
        else:
            sim, res = math.nan, math.nan
        rows.append({"n": n, "momentum": mom, "simulation": sim, "sim_residual": res})
    semi = wall_absorption_semi(1, theta_nodes=128).value
    vals = [r["momentum"] for r in rows]
    ns = [r["n"] for r in rows]
    if len(vals) >= 2:
        n1, n2 = ns[-2], ns[-1]
        rich = (n2 * vals[-1] - n1 * vals[-2]) / (n2 - n1)
    else:
        rich = vals[-1]
    lf = fit_linear_fractional(vals)[3] if len(vals) >= 4 else math.nan
    return ProbeReport(rows, semi, rich, abs(rich - 2 / 3), lf, semi < min(vals[-3:]))
