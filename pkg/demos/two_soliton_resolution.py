"""Soliton resolution for a two-bump datum.

Two Lorentzians, R_i placed eight units ahead of R_2i, do not form an exact
two-soliton.  The spectrum still yields two bound states with parameters p_1
and p_2, and the solution should approach R_p1(x - c_1 t) + R_p2(x - c_2 t)
plus a small radiation term.  The remainder shrinks as the solitons separate,
and the mass budget 2 pi sum |lambda_j| + continuous part = ||Pi u0||^2 closes.

    python demos/two_soliton_resolution.py
"""

from bolab import make_grid, multi_soliton, discrete_spectrum, LambdaGrid, scattering_data
from bolab.resolution import remainder_report

grid = make_grid(64.0, 2048)
u0 = multi_soliton(grid, [1j, 2j], [8.0, 0.0])
# the half-line engine pins down Re p more sharply than the torus one, which
# matters here: an error in position shows up directly in the remainder
spec = discrete_spectrum(u0, method="line")
for lam, p, c in zip(spec.eigenvalues, spec.p, spec.velocities):
    print(f"lambda = {lam:+.5f}   p = {p:.4f}   speed = {c:.4f}")

sd = scattering_data(u0, LambdaGrid.graded(20.0), keep_fields=False, signs=(-1,))
rep = remainder_report(u0, spec, sd, [0.0, 10.0, 20.0, 30.0])
print(rep.to_csv())
b = rep.budget
print(f"budget: 2pi sum|lambda| = {b['bound']:.5f}, continuous = {b['continuous']:.2e}, "
      f"||Pi u0||^2 = {b['norm_sq']:.5f}")
print(f"log-log slope of ||r||: {rep.decay_slope():.2f}")
