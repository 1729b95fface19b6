"""Scattering data of the anti-soliton -R_i.

A nonpositive datum has no bound states, so all of its L^2 mass is carried
by the continuous spectrum.  We compute the distorted Fourier transforms
against the generalized eigenfunctions m_- and m_+ on the default lambda grid,
check that their moduli agree, and close the mass budget
int |u~|^2 dlam / 2pi = ||Pi u0||^2 on a graded rule over the half line.

    python demos/anti_soliton_scattering.py
"""

import numpy as np

from bolab import make_grid, soliton, discrete_spectrum, LambdaGrid, scattering_data
from bolab.scattering import plancherel_budget
from bolab.spectrum import spectral_support

grid = make_grid(64.0, 2048)
u0 = soliton(grid, sign=-1)
print(f"bound states: {discrete_spectrum(u0).count}")

sd = scattering_data(u0, LambdaGrid.uniform(0.2, 4.0, 64), keep_fields=False)
gap = np.max(np.abs(np.abs(sd.radiation_plus) - np.abs(sd.radiation_minus)))
print(f"sup | |u+| - |u-| | over [0.2, 4]: {gap:.2e}")
for lam, a in list(zip(sd.lambda_grid.nodes, np.abs(sd.radiation_plus)))[::16]:
    print(f"  lambda = {lam:5.2f}   |u~(lambda)| = {a:.5f}")

graded = scattering_data(u0, LambdaGrid.graded(spectral_support(u0)), keep_fields=False,
                         signs=(-1,))
spec = discrete_spectrum(u0, method="line")
b = plancherel_budget(u0, u0, graded, spec)
print(f"continuous mass {b.continuous:.8f} vs ||Pi u0||^2 {b.norm_sq:.8f} "
      f"(relative gap {b.relative:.1e})")
