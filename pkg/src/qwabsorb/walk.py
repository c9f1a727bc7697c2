"""Exact evolution of absorbing coined quantum walks on Z^d.

Conventions
-----------
Directions are ordered ``(R, L)`` for the two-state line walk, ``(R, S, L)``
for the lazy line walk and ``(S+1, S-1, S+2, S-2, ...)`` on Z^d.  A coin
matrix acts on the internal space as ``new = U @ old``: column index is the
incoming direction, row index the outgoing one.  With the two-state coin
``[[a, b], [-conj(b), conj(a)]]`` a particle at ``|1>|R>`` therefore reaches
``|0>|L>`` with amplitude ``-conj(b)``.

One step is coin, shift, then projective measurement at the absorbers.  The
initial state is never measured.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, EnumerationBudgetError

Position = Tuple[int, ...]
Key = Tuple[Position, int]

# --------------------------------------------------------------------------- #
#                                   Coins                                     #
# --------------------------------------------------------------------------- #

TWO_STATE = "two-state"
GROVER3 = "grover3"
GROVER = "grover"


@dataclass(frozen=True)
class CoinSpec:
    """Unitary coin: a two-state ``(a, b)`` coin, the 3x3 Grover matrix or the
    ``2d x 2d`` Grover matrix."""

    kind: str
    a: complex = 0j
    b: complex = 0j
    d: int = 1

    def __post_init__(self):
        if self.kind == TWO_STATE:
            norm = abs(self.a) ** 2 + abs(self.b) ** 2
            if abs(norm - 1.0) > 1e-12:
                raise ConfigurationError(f"|a|^2+|b|^2 = {norm!r}, expected 1")
        elif self.kind == GROVER:
            if int(self.d) < 1:
                raise ConfigurationError(f"Grover dimension must be positive, got {self.d}")
        elif self.kind != GROVER3:
            raise ConfigurationError(f"unknown coin kind {self.kind!r}")

    @classmethod
    def two_state(cls, a: complex, b: complex) -> "CoinSpec":
        return cls(TWO_STATE, complex(a), complex(b))

    @classmethod
    def from_weight(cls, a_sq: float, phase_a: float = 0.0, phase_b: float = 0.0) -> "CoinSpec":
        """Two-state coin with ``|a|^2 = a_sq`` and optional phases."""
        a = math.sqrt(a_sq) * complex(math.cos(phase_a), math.sin(phase_a))
        b = math.sqrt(1.0 - a_sq) * complex(math.cos(phase_b), math.sin(phase_b))
        return cls(TWO_STATE, a, b)

    @classmethod
    def hadamard(cls) -> "CoinSpec":
        s = 1.0 / math.sqrt(2.0)
        return cls(TWO_STATE, complex(s), complex(s))

    @classmethod
    def grover3(cls) -> "CoinSpec":
        return cls(GROVER3)

    @classmethod
    def grover(cls, d: int) -> "CoinSpec":
        return cls(GROVER, d=int(d))

    @property
    def size(self) -> int:
        if self.kind == TWO_STATE:
            return 2
        if self.kind == GROVER3:
            return 3
        return 2 * self.d

    def matrix(self) -> np.ndarray:
        if self.kind == TWO_STATE:
            a, b = self.a, self.b
            return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)
        if self.kind == GROVER3:
            return (np.full((3, 3), 2.0) - 3.0 * np.eye(3)).astype(complex) / 3.0
        k = 2 * self.d
        return (np.full((k, k), 1.0 / self.d) - np.eye(k)).astype(complex)


# --------------------------------------------------------------------------- #
#                               Direction sets                                #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class DirectionSet:
    dims: int
    includes_stay: bool
    directions: Tuple[Position, ...]
    names: Tuple[str, ...]

    @classmethod
    def line(cls) -> "DirectionSet":
        return cls(1, False, ((1,), (-1,)), ("R", "L"))

    @classmethod
    def line_with_stay(cls) -> "DirectionSet":
        return cls(1, True, ((1,), (0,), (-1,)), ("R", "S", "L"))

    @classmethod
    def lattice(cls, d: int) -> "DirectionSet":
        dirs, names = [], []
        for axis in range(d):
            for sign in (1, -1):
                v = [0] * d
                v[axis] = sign
                dirs.append(tuple(v))
                names.append(f"S{'+' if sign > 0 else '-'}{axis + 1}")
        return cls(d, False, tuple(dirs), tuple(names))

    def __len__(self) -> int:
        return len(self.directions)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def as_array(self) -> np.ndarray:
        return np.array(self.directions, dtype=np.int64).reshape(len(self), self.dims)


def _check_compatible(coin: CoinSpec, dirs: DirectionSet) -> None:
    if coin.size != len(dirs):
        raise ConfigurationError(
            f"coin of size {coin.size} does not match {len(dirs)} directions"
        )


def _pos(p) -> Position:
    if isinstance(p, (int, np.integer)):
        return (int(p),)
    return tuple(int(v) for v in p)


# --------------------------------------------------------------------------- #
#                                   States                                    #
# --------------------------------------------------------------------------- #


class WalkState:
    """Sparse map ``(position, direction index) -> amplitude``."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes: Optional[Dict[Key, complex]] = None):
        self.amplitudes: Dict[Key, complex] = {}
        if amplitudes:
            for (p, s), v in amplitudes.items():
                self.amplitudes[(_pos(p), int(s))] = complex(v)

    @classmethod
    def basis(cls, position, direction: int) -> "WalkState":
        return cls({(_pos(position), direction): 1.0})

    @classmethod
    def superposition(cls, position, weights: Sequence[complex]) -> "WalkState":
        """``|position> (sum_k weights[k] |k>)``; zero weights are dropped."""
        p = _pos(position)
        return cls({(p, k): w for k, w in enumerate(weights) if w != 0})

    def norm2(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.amplitudes.values()))

    def __getitem__(self, key) -> complex:
        p, s = key
        return self.amplitudes.get((_pos(p), int(s)), 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def copy(self) -> "WalkState":
        out = WalkState()
        out.amplitudes = dict(self.amplitudes)
        return out

    def support_radius(self, center) -> int:
        c = _pos(center)
        if not self.amplitudes:
            return 0
        return max(sum(abs(x - y) for x, y in zip(p, c)) for p, _ in self.amplitudes)

    def prune(self, threshold: float) -> "WalkState":
        out = WalkState()
        out.amplitudes = {k: v for k, v in self.amplitudes.items() if abs(v) > threshold}
        return out

    def __repr__(self) -> str:
        return f"WalkState({len(self)} entries, norm2={self.norm2():.6g})"


def step(state: WalkState, coin: CoinSpec, dirs: DirectionSet) -> WalkState:
    """Apply ``Q = T (I x U)`` once."""
    _check_compatible(coin, dirs)
    U = coin.matrix()
    k = len(dirs)
    vecs = dirs.directions
    out: Dict[Key, complex] = defaultdict(complex)
    for (g, s_in), amp in state.amplitudes.items():
        if amp == 0:
            continue
        for s_out in range(k):
            u = U[s_out, s_in]
            if u == 0:
                continue
            v = vecs[s_out]
            out[(tuple(x + dx for x, dx in zip(g, v)), s_out)] += u * amp
    res = WalkState()
    res.amplitudes = dict(out)
    return res


# --------------------------------------------------------------------------- #
#                                 Absorbers                                   #
# --------------------------------------------------------------------------- #

POINTS_1D = "points"
WALLS = "walls"


@dataclass(frozen=True)
class AbsorberSet:
    """Absorbing points on the line, or walls ``{x : x[0] = k}`` on Z^d."""

    kind: str
    coords: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in (POINTS_1D, WALLS):
            raise ConfigurationError(f"unknown absorber kind {self.kind!r}")
        if not self.coords:
            raise ConfigurationError("absorber set must be non-empty")

    @classmethod
    def points(cls, *pts: int) -> "AbsorberSet":
        return cls(POINTS_1D, frozenset(int(p) for p in pts))

    @classmethod
    def interval(cls, n: int) -> "AbsorberSet":
        """Absorbers at 0 and ``n`` (``n >= 2``)."""
        if n < 2:
            raise ConfigurationError(f"finite lattice needs n >= 2, got {n}")
        return cls.points(0, n)

    @classmethod
    def walls(cls, *ks: int) -> "AbsorberSet":
        return cls(WALLS, frozenset(int(k) for k in ks))

    def label(self, position: Position) -> Optional[int]:
        """Absorber hit at ``position`` (point or wall coordinate), else None."""
        x = position[0]
        if self.kind == POINTS_1D and len(position) != 1:
            raise ConfigurationError("point absorbers live on the line")
        return x if x in self.coords else None


def partition(state: WalkState, absorbers: AbsorberSet) -> Tuple[WalkState, WalkState]:
    """Split ``state`` into (amplitude off the absorbers, amplitude on them)."""
    kept, hit = WalkState(), WalkState()
    for key, amp in state.amplitudes.items():
        if absorbers.label(key[0]) is None:
            kept.amplitudes[key] = amp
        else:
            hit.amplitudes[key] = amp
    return kept, hit


def absorb_measure(state: WalkState, absorbers: AbsorberSet) -> Tuple[WalkState, Dict[int, float]]:
    """Remove all amplitude sitting on absorbers; report the mass per absorber."""
    kept, hit = partition(state, absorbers)
    masses = {k: 0.0 for k in absorbers.coords}
    for (p, _), amp in hit.amplitudes.items():
        masses[absorbers.label(p)] += abs(amp) ** 2
    return kept, masses


# --------------------------------------------------------------------------- #
#                                 Reports                                     #
# --------------------------------------------------------------------------- #

SIMULATION = "simulation"
HADAMARD = "hadamard"
CLOSED_FORM = "closed-form"


@dataclass
class AbsorptionReport:
    probability: float
    per_step_mass: List[Tuple[int, Dict[int, float]]]
    steps_run: int
    residual_mass: float
    method: str = SIMULATION
    absorbed: Dict[int, float] = field(default_factory=dict)
    converged: bool = True
    error_estimate: float = 0.0

    @property
    def untracked_mass(self) -> float:
        tracked = {k for _, m in self.per_step_mass[:1] for k in m}
        return sum(v for k, v in self.absorbed.items() if k not in tracked)

    def cumulative(self) -> np.ndarray:
        """Running total of the tracked absorbed mass after each step."""
        return np.cumsum([sum(m.values()) for _, m in self.per_step_mass])


# --------------------------------------------------------------------------- #
#                          Dense lattice engine                               #
# --------------------------------------------------------------------------- #


class _DenseLattice:
    """Array-backed evolution on a box that contains the whole light cone.

    Axes listed in ``periodic_width`` are wrapped (transverse axes only); the
    rest are sized so that no amplitude can leave the box within ``steps``.
    """

    def __init__(self, initial: WalkState, coin, dirs, absorbers, steps, periodic_width=None):
        self.U = coin.matrix()
        self.vecs = dirs.as_array()
        d = dirs.dims
        pts = np.array([p for p, _ in initial.amplitudes], dtype=np.int64).reshape(-1, d)
        lo = pts.min(axis=0) - steps
        hi = pts.max(axis=0) + steps
        # absorbers cap the first axis
        ks = np.array(sorted(absorbers.coords))
        below = ks[ks <= pts[:, 0].min()]
        above = ks[ks >= pts[:, 0].max()]
        if below.size:
            lo[0] = max(lo[0], below.max())
        if above.size:
            hi[0] = min(hi[0], above.min())
        self.periodic = [False] * d
        if periodic_width is not None:
            for ax in range(1, d):
                self.periodic[ax] = True
                lo[ax] = -(periodic_width // 2)
                hi[ax] = lo[ax] + periodic_width - 1
        self.lo = lo
        self.shape = tuple(int(v) for v in hi - lo + 1)
        self.psi = np.zeros((len(dirs),) + self.shape, dtype=complex)
        for (p, s), amp in initial.amplitudes.items():
            idx = self._index(p)
            self.psi[(s,) + idx] += amp
        # absorber labels along axis 0
        first = np.arange(self.shape[0]) + lo[0]
        self.labels0 = np.array([k if k in absorbers.coords else -(10 ** 18) for k in first])
        self.absorb_rows = np.flatnonzero(self.labels0 != -(10 ** 18))

    def _index(self, p):
        out = []
        for ax, x in enumerate(p):
            i = x - self.lo[ax]
            if self.periodic[ax]:
                i %= self.shape[ax]
            out.append(int(i))
        return tuple(out)

    def step(self):
        mixed = np.tensordot(self.U, self.psi, axes=(1, 0))
        new = np.zeros_like(mixed)
        for s, v in enumerate(self.vecs):
            src = mixed[s]
            dst = new[s]
            src_sl, dst_sl = [], []
            rolled = src
            for ax, dx in enumerate(v):
                dx = int(dx)
                if self.periodic[ax]:
                    if dx:
                        rolled = np.roll(rolled, dx, axis=ax)
                    src_sl.append(slice(None))
                    dst_sl.append(slice(None))
                elif dx > 0:
                    src_sl.append(slice(0, -dx))
                    dst_sl.append(slice(dx, None))
                elif dx < 0:
                    src_sl.append(slice(-dx, None))
                    dst_sl.append(slice(0, dx))
                else:
                    src_sl.append(slice(None))
                    dst_sl.append(slice(None))
            dst[tuple(dst_sl)] = rolled[tuple(src_sl)]
        self.psi = new

    def absorb(self):
        """Zero the absorber rows; return ({label: mass}, removed amplitudes)."""
        masses = {}
        removed = {}
        for r in self.absorb_rows:
            block = self.psi[:, r]
            masses[int(self.labels0[r])] = float(np.sum(np.abs(block) ** 2))
            removed[int(self.labels0[r])] = block.copy()
            self.psi[:, r] = 0
        return masses, removed

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2))

    def to_state(self) -> WalkState:
        out = WalkState()
        nz = np.argwhere(self.psi != 0)
        for row in nz:
            s = int(row[0])
            pos = tuple(int(i + self.lo[ax]) for ax, i in enumerate(row[1:]))
            out.amplitudes[(pos, s)] = complex(self.psi[tuple(row)])
        return out


# --------------------------------------------------------------------------- #
#                                   Runs                                      #
# --------------------------------------------------------------------------- #


def run_absorbing(
    initial: WalkState,
    coin: CoinSpec,
    dirs: DirectionSet,
    absorbers: AbsorberSet,
    tracked: Optional[Iterable[int]] = None,
    max_steps: int = 1000,
    residual_tol: float = 1e-12,
    *,
    stall_tol: Optional[float] = None,
    stall_window: int = 50,
    engine: str = "sparse",
    periodic_width: Optional[int] = None,
    prune: float = 0.0,
) -> AbsorptionReport:
    """Alternate coin-shift steps with absorber measurements.

    Stops after ``max_steps`` or once the surviving norm^2 drops below
    ``residual_tol``.  When ``stall_tol`` is given the run also stops once the
    total mass absorbed over the last ``stall_window`` steps is below it; this
    is the only way to finish walks with trapped (localized) components.

    ``engine="dense"`` evolves numpy arrays on a light-cone box (required for
    ``periodic_width``); ``"sparse"`` evolves the dict-backed state.
    """
    if max_steps < 1:
        raise ConfigurationError("max_steps must be >= 1")
    if residual_tol <= 0:
        raise ConfigurationError("residual_tol must be positive")
    _check_compatible(coin, dirs)
    tracked = set(absorbers.coords if tracked is None else tracked)
    if not tracked <= set(absorbers.coords):
        raise ConfigurationError("tracked absorbers must be a subset of the absorbers")
    for p, _ in initial.amplitudes:
        if absorbers.label(p) is not None:
            raise ConfigurationError(f"initial support {p} lies on an absorber")

    if periodic_width is not None and engine != "dense":
        raise ConfigurationError("periodic transverse axes need engine='dense'")
    if engine == "dense":
        lattice = _DenseLattice(initial, coin, dirs, absorbers, max_steps, periodic_width)
    elif engine != "sparse":
        raise ConfigurationError(f"unknown engine {engine!r}")

    state = initial
    per_step: List[Tuple[int, Dict[int, float]]] = []
    absorbed = {k: 0.0 for k in absorbers.coords}
    window: List[float] = []
    residual = initial.norm2()
    t = 0
    converged = False
    for t in range(1, max_steps + 1):
        if engine == "dense":
            lattice.step()
            masses, _ = lattice.absorb()
            residual = lattice.norm2()
        else:
            state = step(state, coin, dirs)
            state, masses = absorb_measure(state, absorbers)
            if prune:
                state = state.prune(prune)
            residual = state.norm2()
        for k, v in masses.items():
            absorbed[k] += v
        per_step.append((t, {k: masses.get(k, 0.0) for k in sorted(tracked)}))
        if residual < residual_tol:
            converged = True
            break
        if stall_tol is not None:
            window.append(sum(masses.values()))
            if len(window) > stall_window:
                window.pop(0)
                if sum(window) < stall_tol:
                    converged = True
                    break
    prob = float(sum(sum(m.values()) for _, m in per_step))
    return AbsorptionReport(
        probability=prob,
        per_step_mass=per_step,
        steps_run=t,
        residual_mass=residual,
        method=SIMULATION,
        absorbed=absorbed,
        converged=converged,
    )


def absorbed_amplitudes(
    initial: WalkState,
    coin: CoinSpec,
    dirs: DirectionSet,
    absorbers: AbsorberSet,
    steps: int,
    engine: str = "sparse",
) -> List[Dict[Key, complex]]:
    """Amplitudes removed by the measurement at each step ``t = 1..steps``.

    Entry ``t-1`` maps ``(position, direction) -> <b|Q (Pi_no Q)^(t-1)|psi>``,
    i.e. the Taylor coefficient of ``z^t`` of the boundary generating function.
    """
    _check_compatible(coin, dirs)
    out: List[Dict[Key, complex]] = []
    if engine == "dense":
        lat = _DenseLattice(initial, coin, dirs, absorbers, steps)
        for _ in range(steps):
            lat.step()
            hit = {}
            for r in lat.absorb_rows:
                block = lat.psi[:, r]
                for idx in np.argwhere(block != 0):
                    s = int(idx[0])
                    pos = (int(r + lat.lo[0]),) + tuple(
                        int(i + lat.lo[ax + 1]) for ax, i in enumerate(idx[1:])
                    )
                    hit[(pos, s)] = complex(block[tuple(idx)])
            lat.absorb()
            out.append(hit)
        return out
    state = initial
    for _ in range(steps):
        state = step(state, coin, dirs)
        state, hit = partition(state, absorbers)
        out.append(dict(hit.amplitudes))
    return out


def evolve_matrix_element(
    initial: Tuple, target: Tuple, coin: CoinSpec, dirs: DirectionSet,
    absorbers: Optional[AbsorberSet], t: int, absorbed: bool = False,
) -> complex:
    """``<target| (Pi_no Q)^t |initial>`` by operator evolution.

    With ``absorbed=True`` the last measurement is skipped, giving
    ``<target| Q (Pi_no Q)^(t-1) |initial>``.
    """
    state = WalkState.basis(*initial)
    for k in range(1, t + 1):
        state = step(state, coin, dirs)
        if absorbers is not None and not (absorbed and k == t):
            state, _ = absorb_measure(state, absorbers)
    return state[target]


# --------------------------------------------------------------------------- #
#                           Path-sum oracle                                   #
# --------------------------------------------------------------------------- #

ENUMERATION_BUDGET = 10 ** 8


def brute_force_amplitude(
    initial: Tuple, target: Tuple, coin: CoinSpec, dirs: DirectionSet,
    absorbers: Optional[AbsorberSet], t: int, absorbed: bool = False,
    chunk: int = 1 << 16,
) -> complex:
    """Sum of path amplitudes over all ``t``-step internal-state paths.

    A path ``(s0, s1, ..., st)`` starts in the initial direction, ends in the
    target direction, has displacement ``target - initial`` and weight
    ``prod U[s_k, s_(k-1)]``.  Paths visiting an absorber at steps ``1..t``
    are discarded (``1..t-1`` when ``absorbed``, where the endpoint itself is
    the absorber being observed).
    """
    _check_compatible(coin, dirs)
    k = len(dirs)
    if t < 1:
        raise ConfigurationError("t must be >= 1")
    if k ** t > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(
            f"{k}^{t} = {k ** t} paths exceeds the budget of {ENUMERATION_BUDGET}"
        )
    g0, s0 = _pos(initial[0]), int(initial[1])
    g1, s1 = _pos(target[0]), int(target[1])
    U = coin.matrix()
    vecs = dirs.as_array()
    start = np.array(g0)
    total = 0j
    last_checked = t - 1 if absorbed else t
    n_paths = k ** t
    powers = k ** np.arange(t - 1, -1, -1)
    if absorbers is not None:
        ks = np.array(sorted(absorbers.coords))
    for lo in range(0, n_paths, chunk):
        ids = np.arange(lo, min(lo + chunk, n_paths))
        digits = (ids[:, None] // powers[None, :]) % k  # steps 1..t
        mask = digits[:, -1] == s1
        if not mask.any():
            continue
        digits = digits[mask]
        steps_ = vecs[digits]  # (P, t, d)
        pos = start + np.cumsum(steps_, axis=1)
        ok = np.all(pos[:, -1, :] == np.array(g1), axis=1)
        if absorbers is not None and last_checked > 0:
            hits = np.isin(pos[:, :last_checked, 0], ks).any(axis=1)
            ok &= ~hits
        if not ok.any():
            continue
        digits = digits[ok]
        prev = np.concatenate([np.full((digits.shape[0], 1), s0), digits[:, :-1]], axis=1)
        amps = np.prod(U[digits, prev], axis=1)
        total += amps.sum()
    return complex(total)


# --------------------------------------------------------------------------- #
#                          Classical random walk                              #
# --------------------------------------------------------------------------- #


def _check_pq(p, q):
    if not (0 < p < 1) or abs(p + q - 1) > 1e-12:
        raise ConfigurationError(f"need 0 < p < 1 and p + q = 1, got p={p}, q={q}")


def _finite_chain(p: float, q: float, n: int) -> np.ndarray:
    """Left-absorption probabilities for start 1..n-1 on {0..n}."""
    size = n - 1
    ab = np.zeros((3, size))
    ab[0, 1:] = -p  # super-diagonal: move right
    ab[1, :] = 1.0
    ab[2, :-1] = -q  # sub-diagonal: move left
    rhs = np.zeros(size)
    rhs[0] = q
    return solve_banded((1, 1), ab, rhs)


def classical_absorption(p: float, q: float, m: int, n: Optional[float] = None,
                         tol: float = 1e-10) -> float:
    """Probability that the classical walk from ``m`` hits 0 before ``n``.

    Solved as an absorbing Markov chain (tridiagonal linear system).  For
    ``n`` in ``(None, inf)`` the right boundary is pushed out by doubling and
    the sequence is Aitken-extrapolated until the estimate moves by < ``tol``.
    """
    _check_pq(p, q)
    if n is not None and not math.isinf(n):
        n = int(n)
        if not 0 < m < n:
            raise ConfigurationError(f"need 0 < m < n, got m={m}, n={n}")
        return float(_finite_chain(p, q, n)[m - 1])
    if m < 1:
        raise ConfigurationError(f"need m >= 1, got {m}")
    size = max(64, 4 * m)
    seq = []
    prev = None
    while size <= 1 << 24:
        seq.append(float(_finite_chain(p, q, size)[m - 1]))
        if len(seq) >= 3:
            x0, x1, x2 = seq[-3:]
            den = x2 - 2 * x1 + x0
            est = x2 if abs(den) < 1e-300 else x2 - (x2 - x1) ** 2 / den
            if prev is not None and abs(est - prev) < tol:
                return float(min(1.0, est))
            prev = est
        size *= 2
    return float(min(1.0, prev))
