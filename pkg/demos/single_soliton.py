"""A single soliton, seen from the spectral side.

The profile R_i(x) = 2 / (x^2 + 1) is the simplest datum with a bound state.
Its Lax operator has exactly one eigenvalue, -1/2, and the eigenfunction is
i / ((x + i) sqrt(pi)).  This script recovers both from the discretized
operator, reads off the soliton parameter p = i and the speed c = 1, and
then watches the soliton move with the time stepper.

    python demos/single_soliton.py
"""

import numpy as np

from bolab import make_grid, soliton, discrete_spectrum, step_evolve, StepperConfig

grid = make_grid(64.0, 2048)
u0 = soliton(grid)

spec = discrete_spectrum(u0)
print(f"bound states: {spec.count}")
print(f"eigenvalue  : {spec.eigenvalues[0]:+.6f}   (exact -0.5)")
print(f"p           : {spec.p[0]:.6f}   (exact 1j)")
print(f"speed       : {spec.velocities[0]:.6f}   (exact 1)")

# On the frequency side the closed form is 2 sqrt(pi) e^{-xi}.  Comparing
# there avoids the 1% of |phi|^2 that lies outside the box.
exact = 2 * np.sqrt(np.pi) * np.exp(-grid.hardy_xi)
err = np.max(np.abs(spec.eigenfunctions[0].coefficients - exact)) / exact[0]
print(f"eigenfunction transform vs 2 sqrt(pi) e^(-xi): {err:.1e} (relative sup)")

# The soliton translates rigidly at speed 1/Im p.
traj = step_evolve(u0, StepperConfig(dt=1e-3, t_end=6.0, snapshots=(2.0, 4.0, 6.0)))
for t, u in traj:
    peak = grid.x[np.argmax(u.values)]
    print(f"t = {t:3.1f}: peak at x = {peak:6.3f}, distance to R_i(x - t) = "
          f"{(u - soliton(grid, shift=t)).norm():.2e}")
