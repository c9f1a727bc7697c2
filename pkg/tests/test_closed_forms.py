import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qwabsorb import closed_forms as cf
from qwabsorb import genfun as gf
from qwabsorb.errors import ConfigurationError
from qwabsorb.hadamard import handle_probability
from qwabsorb.verify import coin_grid, simulate_line
from qwabsorb.walk import CoinSpec

H = CoinSpec.hadamard()
X = 1 / math.sqrt(2)

# Grover3 P_5^(2)(1,0,0) from walk-core simulation (stall-stopped at 609
# steps; the remaining 0.40408 is localized), frozen before the closed form
# was trusted.
GROVER3_M2_N5_SIM = 0.1619106568103843

weights = st.floats(0.02, 0.98)
phases = st.floats(-math.pi, math.pi)
unit2 = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: sum(x * x for x in v) > 1e-3).map(
    lambda v: (complex(v[0], v[1]) / math.sqrt(sum(x * x for x in v)),
               complex(v[2], v[3]) / math.sqrt(sum(x * x for x in v))))


# --------------------------------------------------------------------------- classical

def test_classical_examples():
    assert cf.classical_closed(0.5, 0.5, 3, 10) == pytest.approx(0.7, abs=1e-15)
    assert cf.classical_closed(0.6, 0.4, 1) == pytest.approx(2 / 3, abs=1e-15)
    assert cf.classical_closed(0.5, 0.5, 4) == 1.0
    assert cf.classical_closed(0.4, 0.6, 4) == 1.0


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_classical_recurrences(p):
    res = cf.classical_recurrence_residuals(p, 1 - p, 30)
    assert max(res.values()) < 1e-12


@given(st.integers(1, 60), st.integers(2, 200))
def test_classical_near_symmetric_is_continuous(m, n):
    m = min(m, n - 1)
    sym = cf.classical_closed(0.5, 0.5, m, n)
    assert abs(cf.classical_closed(0.5 + 1e-10, 0.5 - 1e-10, m, n) - sym) < 1e-7


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_classical_ray_limit(p):
    for c in (0.25, 0.5, 0.75):
        assert abs(cf.classical_closed(p, 1 - p, cf.ray_position(c, 4000), 4000)
                   - cf.classical_ray_limit(p, 1 - p, c)) < 1e-3


# --------------------------------------------------------------------------- two-state semi-infinite

def test_semi_infinite_hadamard_value():
    assert cf.two_state_semi_closed(H).value == pytest.approx(2 / math.pi, abs=1e-15)


def test_semi_infinite_a_zero_is_one():
    assert cf.two_state_semi_closed(CoinSpec.two_state(0, 1)).value == pytest.approx(1.0, abs=1e-15)


@given(weights)
def test_trig_form_matches_arccos_form(w):
    res = cf.two_state_semi_closed(CoinSpec.from_weight(w))
    assert res.value == pytest.approx(res.trig_value, abs=1e-12)


def test_printed_trig_form_only_agrees_at_quarter_pi():
    assert cf.two_state_semi_trig_printed(math.pi / 4) == pytest.approx(2 / math.pi, abs=1e-15)
    coin = CoinSpec.from_weight(0.3)
    phi = math.acos(math.sqrt(0.3))
    assert abs(cf.two_state_semi_trig_printed(phi) - cf.two_state_semi_closed(coin).value) > 1e-2


@settings(max_examples=6, deadline=None)
@given(weights, phases)
def test_semi_infinite_closed_matches_quadrature(w, pa):
    coin = CoinSpec.from_weight(w, pa)
    q = handle_probability(gf.GenFunHandle("two-state-semi", "r", 1, coin=coin))
    assert abs(q.value - cf.two_state_semi_closed(coin).value) < 1e-5


# --------------------------------------------------------------------------- two-state finite

def test_finite_hadamard_examples():
    assert cf.two_state_finite_components(H, 1, 2).p10 == pytest.approx(0.5, abs=1e-15)
    assert cf.two_state_finite_components(H, 1, 3).p10 == pytest.approx(2 / 3, abs=1e-15)
    assert abs(cf.two_state_finite_components(H, 1, 4000).p10 - X) < 1e-4


def test_fixed_m_limits():
    coin = CoinSpec.from_weight(0.3)
    b = math.sqrt(0.7)
    assert cf.two_state_limits(coin, 1) == pytest.approx(b, abs=1e-15)
    assert cf.two_state_limits(coin, 400) == pytest.approx(b / 2, abs=1e-15)
    assert cf.two_state_limits(coin, mode="ray_c", c=0.3) == pytest.approx(b / 2, abs=1e-15)
    h2 = 1 / (2 * math.sqrt(2)) * (1 + (math.sqrt(2) - 1) / (math.sqrt(2) + 1))
    assert cf.two_state_limits(H, 2) == pytest.approx(h2, abs=1e-15)
    assert abs(cf.two_state_finite_components(H, 2, 4000).p10 - h2) < 1e-4


def test_ray_limit_approached():
    coin = CoinSpec.from_weight(0.35)
    n = 4000
    v = cf.two_state_finite_components(coin, cf.ray_position(0.4, n), n).p10
    assert abs(v - cf.two_state_limits(coin, mode="ray_c", c=0.4)) < 1e-4


def test_limit_mode_validation():
    with pytest.raises(ConfigurationError):
        cf.two_state_limits(H, mode="ray_c", c=1.5)
    with pytest.raises(ConfigurationError):
        cf.two_state_limits(H, 0)


def test_conservation_grid():
    coins = coin_grid() + [H]
    rng = np.random.default_rng(11)
    for k in range(50):
        coin = coins[k % len(coins)]
        n = int(rng.integers(2, 60))
        m = int(rng.integers(1, n))
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        _, _, total = cf.two_state_conservation(cf.AbsorptionQuery("two-state", m, n, tuple(v), coin))
        assert abs(total - 1) < 1e-12


def test_two_site_right_absorption():
    left, right, _ = cf.two_state_conservation(cf.AbsorptionQuery("two-state", 1, 2, (1, 0), H))
    assert right == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("m,n", [(1, 5), (3, 7), (2, 9)])
def test_simulated_total_absorption(m, n):
    coin = coin_grid()[1]
    sim = simulate_line(coin, (0.6, 0.8j), m, n)
    assert abs(sim.residual_mass) < 1e-6
    assert abs(sum(sim.absorbed.values()) - 1) < 1e-6


def test_lattice_recurrence_corrected_vs_printed():
    p3 = cf.two_state_finite_components(H, 1, 3).p10
    assert cf.lattice_recurrence_corrected(X, 0.5) == pytest.approx(p3, abs=1e-15)
    printed = cf.lattice_recurrence_printed(X, 0.5)
    assert printed == pytest.approx(0.80474, abs=1e-5)
    assert abs(printed - p3) > 0.1


@pytest.mark.parametrize("coin", coin_grid() + [H])
def test_two_state_recurrences(coin):
    res = cf.two_state_recurrences(coin, n_max=50, n_pos=20, samples=cf.internal_state_grid(20))
    assert res.residuals["lattice_corrected"] < 1e-12
    assert res.residuals["position"] < 1e-8
    assert res.residuals["first_step"] < 1e-12
    assert res.residuals["lattice_printed"] > 1e-3


def test_position_recurrence_hadamard_absolute():
    pm = [cf.two_state_finite_components(H, m, 20).p10 for m in range(1, 20)]
    for i in range(16):
        assert abs(pm[i + 3] - 7 * pm[i + 2] + 7 * pm[i + 1] - pm[i]) < 1e-10


@settings(max_examples=20, deadline=None)
@given(weights, phases, phases, unit2, st.integers(2, 40))
def test_first_step_relation(w, pa, pb, ab, n):
    coin = CoinSpec.from_weight(w, pa, pb)
    comps = cf.two_state_finite_components(coin, 1, n)
    alpha, beta = ab
    assert abs(comps.combine(alpha, beta) - cf.first_step_relation(coin, alpha, beta, comps.p10)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(weights, phases, phases, unit2, st.integers(2, 60), st.data())
def test_probabilities_in_unit_interval(w, pa, pb, ab, n, data):
    m = data.draw(st.integers(1, n - 1))
    coin = CoinSpec.from_weight(w, pa, pb)
    p, _ = cf.two_state_finite_closed(cf.AbsorptionQuery("two-state", m, n, ab, coin))
    assert -1e-12 <= p <= 1 + 1e-12
    assert -1e-12 <= cf.two_state_semi_probability(coin, *ab) <= 1 + 1e-12


def test_phase_invariance():
    rng = np.random.default_rng(5)
    base = cf.two_state_finite_components(CoinSpec.from_weight(0.35), 3, 11)
    for _ in range(8):
        pa, pb = rng.uniform(-math.pi, math.pi, 2)
        comps = cf.two_state_finite_components(CoinSpec.from_weight(0.35, pa, pb), 3, 11)
        assert comps.p10 == pytest.approx(base.p10, abs=1e-15)
        assert comps.p01 == pytest.approx(base.p01, abs=1e-15)


@pytest.mark.parametrize("coin", coin_grid()[::2] + [H])
def test_closed_matches_simulation_small_grid(coin):
    for n in range(2, 8):
        for m in range(1, n):
            for amps in ((1, 0), (0, 1), (0.6, 0.8j)):
                q = cf.AbsorptionQuery("two-state", m, n, amps, coin)
                sim = simulate_line(coin, amps, m, n)
                assert abs(cf.two_state_finite_closed(q)[0] - sim.probability) < 1e-8


def test_query_validation():
    with pytest.raises(ConfigurationError):
        cf.AbsorptionQuery("two-state", 1, 3, (1, 1), H)
    with pytest.raises(ConfigurationError):
        cf.AbsorptionQuery("two-state", 3, 3, (1, 0), H)
    with pytest.raises(ConfigurationError):
        cf.AbsorptionQuery("grover3", 1, 3, (1, 0), None)


# --------------------------------------------------------------------------- Grover3

def test_grover3_semi_value():
    assert round(cf.grover3_semi_closed(), 4) == 0.6693


def test_grover3_semi_quadrature():
    q = handle_probability(gf.GenFunHandle("grover3-semi", "r", 1))
    assert abs(q.value - cf.grover3_semi_closed()) < 1e-4


def test_grover3_semi_simulation():
    sim = simulate_line(CoinSpec.grover3(), (1, 0, 0), 1, None, max_steps=2000, stall_tol=None)
    assert abs(sim.probability - cf.grover3_semi_closed()) < 1e-3


def test_grover3_finite_examples():
    assert cf.grover3_finite_closed(1, 2) == pytest.approx(2 / 3, abs=1e-14)
    assert cf.grover3_finite_closed(1, 3) == pytest.approx(12 / 17, abs=1e-14)
    assert cf.grover3_finite_closed(2, 5) == pytest.approx(GROVER3_M2_N5_SIM, abs=1e-8)


def test_grover3_delta_values():
    dp, dm = cf.grover3_delta(1.0)
    assert dp == pytest.approx(-5 + 2 * math.sqrt(6), abs=1e-14)
    dp, dm = cf.grover3_delta(cf.OMEGA)
    assert dp == pytest.approx(cf.OMEGA * (-3 + 2 * math.sqrt(2)), abs=1e-14)
    assert dm == pytest.approx(cf.OMEGA * (-3 - 2 * math.sqrt(2)), abs=1e-14)


def test_grover3_recurrences():
    res = cf.grover3_recurrences(n_max=50, n_pos=40, m_max=30, hadamard_n=30)
    assert res.residuals["lattice"] < 1e-12
    assert res.residuals["position"] < 1e-8
    assert res.residuals["hadamard_interleave"] < 1e-12


def test_grover3_orbit_start():
    orbit = cf.grover3_orbit(4)
    assert orbit[1] == pytest.approx(2 / 3) and orbit[2] == pytest.approx(12 / 17)
    b5 = cf.grover3_finite_closed(1, 5)
    a9 = cf.two_state_finite_components(H, 1, 9).p10
    assert abs(b5 - a9) < 1e-12


@pytest.mark.parametrize("n", [3, 5, 8])
def test_grover3_closed_matches_simulation(n):
    for m in range(1, n):
        sim = simulate_line(CoinSpec.grover3(), (1, 0, 0), m, n)
        assert abs(cf.grover3_finite_closed(m, n) - sim.probability) < 1e-8


# --------------------------------------------------------------------------- reflection

def test_reflection_hadamard_n100():
    assert 2 / math.pi <= cf.two_state_finite_components(H, 1, 100).p10


def test_reflection_holds_beyond_crossover():
    rep = cf.reflection_inequality_suite(coin_grid() + [H], n_values=range(2, 101))
    for crossover in rep.crossover.values():
        assert 2 < crossover <= 4
    for violation in rep.asserted_violations:
        assert violation[4] < 4


def test_reflection_fails_at_two_sites():
    # P_2^(1)(1,0) = |b|^2 lies below the semi-infinite value
    coin = CoinSpec.from_weight(0.5)
    assert cf.two_state_finite_components(coin, 1, 2).p10 < cf.two_state_semi_closed(coin).value


@given(weights)
def test_semi_infinite_below_finite_limit(w):
    coin = CoinSpec.from_weight(w)
    assert cf.two_state_semi_closed(coin).value < math.sqrt(1 - w)


def test_grover3_strict_inequality():
    assert cf.grover3_semi_closed() < cf.grover3_finite_closed(1, 4000)
    # the limit is 1/sqrt(2)
    assert cf.grover3_finite_closed(1, 4000) == pytest.approx(X, abs=1e-12)


@pytest.mark.slow
def test_localization_sum_at_fifty():
    def right(m, n):
        return handle_probability(gf.GenFunHandle("grover3-finite", "l", n - m, n)).value

    rep = cf.reflection_inequality_suite([], fig4_n=50, fig4_right=right)
    sums = rep.localization_sums
    assert rep.localization_max <= 1 + 1e-9
    assert abs(sums[0] - 1) < 1e-6
    assert all(s < 1 - 1e-6 for s in sums[1:])
