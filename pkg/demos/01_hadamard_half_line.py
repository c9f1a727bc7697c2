"""A Hadamard walker starting next to an absorbing wall.

The walker starts at x = 1 moving right, with an absorber at the origin and
nothing to the right.  Classically a fair walk on a half-line is absorbed
with certainty; the quantum walk escapes with positive probability and is
absorbed only with probability 2/pi.  Three independent routes agree.
"""
import math

from qwabsorb import GenFunHandle, CoinSpec, two_state_semi_probability
from qwabsorb.hadamard import handle_probability
from qwabsorb.verify import simulate_line

H = CoinSpec.hadamard()

closed = two_state_semi_probability(H, 1, 0)
print(f"closed form            {closed:.12f}   (2/pi = {2 / math.pi:.12f})")

# Sum of |coefficients|^2 of the absorbed-amplitude generating function,
# evaluated as a contour integral on the unit circle.
quad = handle_probability(GenFunHandle("two-state-semi", "r", 1, coin=H))
print(f"Hadamard quadrature    {quad.value:.12f}   (error estimate {quad.error:.1e}, {quad.nodes} nodes)")

# Direct evolution: absorbed mass accumulates step by step.
for steps in (50, 200, 2000):
    sim = simulate_line(H, (1, 0), 1, None, max_steps=steps, stall_tol=None)
    print(f"simulation, {steps:4d} steps {sim.probability:.12f}   still walking {sim.residual_mass:.2e}")

print("\nThe remaining mass drifts off to the right and is never absorbed.")
print("For the Hadamard coin the value does not depend on the start state;")
print("for a biased coin it does:")
biased = CoinSpec.from_weight(0.3, 0.5)
for alpha, beta, label in ((1, 0, "|R>"), (0, 1, "|L>"), (2 ** -0.5, 1j * 2 ** -0.5, "(|R>+i|L>)/sqrt2")):
    print(f"  start {label:18s} Hadamard {two_state_semi_probability(H, alpha, beta):.6f}"
          f"   |a|^2 = 0.3: {two_state_semi_probability(biased, alpha, beta):.6f}")
