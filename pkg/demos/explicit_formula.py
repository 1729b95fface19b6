"""The explicit formula against a conventional time stepper.

Pi u(t, z) can be written down without solving the PDE: it is a boundary
value of the resolvent of X* - 2t L_u0 applied to Pi u0.  Here we evaluate
the formula for a small Gaussian at t = 1, compare the resulting field with
an integrating-factor RK4 solution, and follow the two conserved quantities
||u|| and ||L_u Pi u|| out to t = 10.

    python demos/explicit_formula.py
"""

from bolab import make_grid, gaussian, field_at_time, step_evolve, StepperConfig
from bolab.explicit_evolution import invariants, omega_eval

grid = make_grid(64.0, 2048)
u0 = gaussian(grid, 0.3, 2.0)

formula = field_at_time(u0, 1.0)
stepper = step_evolve(u0, StepperConfig(dt=1e-3, t_end=1.0)).at(1.0)
print(f"L2 distance at t = 1: {(formula - stepper).norm():.2e}")

print("value of Pi u(1, z) at a few points above the axis:")
for z in (0.5j, 1 + 1j, -2 + 0.2j):
    print(f"  z = {z}: {omega_eval(u0, 1.0, z):.6f}")

q0 = invariants(u0, 0.0)
for t in (2.5, 5.0, 10.0):
    q = invariants(u0, t)
    print(f"t = {t:4.1f}: ||u|| drift {q['norm'] / q0['norm'] - 1:+.1e}, "
          f"||L_u Pi u|| drift {q['lax_norm'] / q0['lax_norm'] - 1:+.1e}")
