"""The three-state Grover walk traps part of the walker forever.

With a stay direction the Grover coin has eigenvectors that do not move, so
a walker started between two absorbers keeps a localized component which is
never absorbed.  Simulation therefore stops when the absorbed mass stops
changing rather than when the walker is gone.
"""
from qwabsorb import CoinSpec, grover3_finite_closed, grover3_semi_closed
from qwabsorb.closed_forms import grover3_orbit
from qwabsorb.verify import simulate_line

G3 = CoinSpec.grover3()
print(f"half-line value from the closed constant  {grover3_semi_closed():.10f}")
sim = simulate_line(G3, (1, 0, 0), 1, None, max_steps=2000, stall_tol=None)
print(f"half-line simulation, 2000 steps          {sim.probability:.10f}")

print("\n n  m   closed form        simulation        trapped mass  steps")
for n, m in ((2, 1), (3, 1), (5, 2), (8, 3), (12, 6)):
    rep = simulate_line(G3, (1, 0, 0), m, n)
    print(f"{n:2d} {m:2d}  {grover3_finite_closed(m, n):.14f}  {rep.probability:.14f}  {rep.residual_mass:.6f}  {rep.steps_run:5d}")

orbit = grover3_orbit(6)
print("\nFrom x = 1 the lattice-size sequence follows P -> (2 + 3P) / (3 + 4P):")
print("  " + ", ".join(f"{p:.6f}" for p in orbit[1:]) + ", ... -> 1/sqrt2")
print(f"\nThe limit exceeds the half-line value by only {2 ** -0.5 - grover3_semi_closed():.4f}.")
