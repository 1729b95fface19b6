import json

import numpy as np
import pytest

from bolab import scattering as sc
from bolab.data import gaussian, soliton
from bolab.errors import GridMismatchError, InvalidParameterError, NonconvergenceError
from bolab.field_grid import HardyField, RealField, make_grid
from bolab.spectrum import discrete_spectrum, spectral_support


@pytest.fixture(scope="module")
def small():
    return make_grid(32, 1024)


@pytest.fixture(scope="module")
def soliton_data(grid):
    u = soliton(grid)
    return u, sc.scattering_data(u)


@pytest.fixture(scope="module")
def anti_data(grid):
    u = soliton(grid, sign=-1)
    return u, sc.scattering_data(u)


# -- lambda grids -------------------------------------------------------------

def test_lambda_grid_validation():
    with pytest.raises(InvalidParameterError):
        sc.LambdaGrid.uniform(0.0, 4.0, 10)
    with pytest.raises(InvalidParameterError):
        sc.LambdaGrid.uniform(0.2, 4.0, 1)
    with pytest.raises(InvalidParameterError):
        sc.LambdaGrid(np.array([1.0, 0.5]), np.ones(2))


def test_lambda_grid_quadratures():
    lg = sc.LambdaGrid.uniform(0.2, 4.0, 64)
    assert lg.count == 64 and lg.lower == 0.2 and lg.upper == 4.0
    assert np.isclose(lg.integrate(np.ones(64)), 3.8)
    gr = sc.LambdaGrid.graded(6.0)
    assert gr.kind == "graded" and gr.lower > 0
    assert np.isclose(gr.integrate(np.exp(-gr.nodes)), 1 - np.exp(-6.0), atol=1e-10)


# -- eigenfunctions -----------------------------------------------------------

def test_zero_datum_gives_plane_waves(small):
    z = RealField(small, np.zeros(small.point_count))
    for lam in (0.3, 2.0):
        e = np.exp(1j * lam * small.x)
        assert np.array_equal(sc.solve_m_minus(z, lam), e)
        assert np.array_equal(sc.solve_m_plus(z, lam), e)


def test_zero_datum_transform_is_fourier(small):
    z = RealField(small, np.zeros(small.point_count))
    sd = sc.scattering_data(z, sc.LambdaGrid.uniform(0.2, 4.0, 12))
    f = gaussian(small, 0.5, 1.5)
    exact = 0.5 * 1.5 * np.sqrt(np.pi) * np.exp(-(1.5 * sd.lambda_grid.nodes) ** 2 / 4)
    for sign in (-1, 1):
        assert np.allclose(sc.distorted_transform(f, sd, sign), exact, atol=1e-12)


@pytest.mark.parametrize("sign", [-1, 1])
def test_operator_residual_soliton(grid, sign):
    u = soliton(grid)
    m = sc.solve_m_minus(u, 1.0) if sign < 0 else sc.solve_m_plus(u, 1.0)
    assert sc.lax_residual(u, m, 1.0) < 1e-5


def test_operator_residual_detects_wrong_lambda(grid):
    u = soliton(grid)
    m = sc.solve_m_minus(u, 1.0)
    assert sc.lax_residual(u, m, 1.1) > 1e-2


def test_left_normalization(grid):
    u = gaussian(grid)
    lam = 4.0
    m = sc.solve_m_minus(u, lam)
    x1 = grid.x[1]
    assert abs(np.exp(-1j * lam * x1) * m[1] - 1) < 1e-4


def test_left_normalization_slow_approach(grid):
    # a - 1 decays only like 1/x because Pi(u m) has a 1/x tail
    u = gaussian(grid)
    lam = 1.0
    m = sc.solve_m_minus(u, lam)
    a = np.exp(-1j * lam * grid.x) * m
    far, near = abs(a[1] - 1), abs(a[grid.point_count // 4] - 1)
    assert 1.5 < near / far < 2.5


def test_reflection_identity(grid):
    u = RealField(grid, gaussian(grid, 0.4, 1.2, 1.5).values + soliton(grid, 1 + 1j, 3.0).values)
    ur = u.reflected()
    M = grid.point_count
    k = np.arange(1, M)
    for lam in (0.4, 1.7):
        mp = sc.solve_m_plus(u, lam)
        mm_ref = sc.solve_m_minus(ur, lam)
        assert np.max(np.abs(mp[k] - np.conj(mm_ref[M - k]))) < 1e-6


def test_volterra_defects(soliton_data, anti_data, grid):
    for _, sd in (soliton_data, anti_data):
        assert np.all(sd.defects < 1e-6 * np.sqrt(grid.point_count))
        assert np.all(np.isfinite(sd.m_minus)) and np.all(np.isfinite(sd.m_plus))
        assert np.max(np.abs(sd.m_minus)) < 10


def test_nonconvergence_raises(small):
    solver = sc.VolterraSolver(soliton(small, sign=-1), tol=1e-30, max_restarts=1)
    with pytest.raises(NonconvergenceError):
        solver.solve(0.5)


def test_invalid_lambda(small):
    with pytest.raises(InvalidParameterError):
        sc.solve_m_minus(soliton(small), 0.0)


# -- transforms and profiles ----------------------------------------------------

def test_transform_grid_mismatch(soliton_data, small):
    _, sd = soliton_data
    with pytest.raises(GridMismatchError):
        sc.distorted_transform(gaussian(small), sd)


def test_transform_is_linear(anti_data, grid):
    _, sd = anti_data
    f, g = gaussian(grid), gaussian(grid, 0.2, 3.0, 2.0)
    lhs = sc.distorted_transform(2.0 * f - g, sd, 1)
    rhs = 2 * sc.distorted_transform(f, sd, 1) - sc.distorted_transform(g, sd, 1)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_datum_transform_matches_pairing(anti_data):
    # the two differ only through the endpoint sample shared by -L and +L
    u, sd = anti_data
    gap = np.max(np.abs(sc.distorted_transform(u, sd, -1) - sd.dft_minus))
    assert gap < 2.02 * u.grid.spacing * abs(u.values[0])


def test_pure_soliton_has_no_radiation(soliton_data):
    u, sd = soliton_data
    plus, minus = sc.radiation_profiles(u, sd)
    assert np.max(np.abs(plus)) < 5e-3 and np.max(np.abs(minus)) < 5e-3


def test_modulus_identity(anti_data):
    u, sd = anti_data
    plus, minus = sc.radiation_profiles(u, sd)
    assert np.max(np.abs(np.abs(plus) - np.abs(minus))) < 1e-3
    assert np.array_equal(plus, sd.radiation_plus)


def test_workers_match_serial(small):
    u = soliton(small, sign=-1)
    lg = sc.LambdaGrid.uniform(0.5, 2.0, 4)
    a = sc.scattering_data(u, lg, keep_fields=False)
    b = sc.scattering_data(u, lg, keep_fields=False, workers=2)
    assert np.allclose(a.dft_minus, b.dft_minus, atol=1e-13)


def test_radiation_field_is_real_and_carries_mass(small):
    u = soliton(small, sign=-1)
    field, coeffs = sc.radiation_field(u)
    assert field.grid == small
    mass = HardyField(small, coeffs).norm() ** 2
    assert mass == pytest.approx(np.pi, rel=2e-2)


# -- Plancherel ---------------------------------------------------------------

def test_plancherel_bound_state_only(grid, soliton_data):
    u, sd = soliton_data
    spec = discrete_spectrum(u)
    phi = spec.eigenfunctions[0]
    b = sc.plancherel_budget(phi, u, sd, spec)
    assert b.bound == pytest.approx(1.0, abs=1e-6)
    assert b.residual < 1e-3


def test_plancherel_zero(soliton_data, grid):
    u, sd = soliton_data
    spec = discrete_spectrum(u)
    assert sc.plancherel_residual(HardyField.zeros(grid), u, sd, spec) == 0.0


def test_plancherel_pure_soliton_datum(grid):
    u = soliton(grid)
    spec = discrete_spectrum(u, method="line")
    lg = sc.LambdaGrid.graded(spectral_support(u))
    sd = sc.scattering_data(u, lg, keep_fields=False, signs=(-1,))
    b = sc.plancherel_budget(u, u, sd, spec)
    assert b.continuous < 1e-4
    assert b.bound == pytest.approx(2 * np.pi * 0.5, rel=1e-3)


@pytest.mark.parametrize("which", ["anti", "gauss"])
def test_plancherel_datum(grid, which):
    u = soliton(grid, sign=-1) if which == "anti" else gaussian(grid)
    spec = discrete_spectrum(u, method="line")
    lg = sc.LambdaGrid.graded(spectral_support(u))
    sd = sc.scattering_data(u, lg, signs=(-1,))
    assert sc.plancherel_residual(u, u, sd, spec) < 2e-2 * sc.plancherel_budget(u, u, sd, spec).norm_sq
    # orthogonality to the bound states leaves everything in the continuum
    if which == "anti":
        assert spec.count == 0


def test_json_and_columns(anti_data, tmp_path):
    _, sd = anti_data
    d = json.loads(sd.to_json())
    assert len(d["dft_minus"]) == sd.lambda_grid.count
    sd.save_columns(tmp_path / "cols.npz")
    z = np.load(tmp_path / "cols.npz")
    assert z["m_minus"].shape == (sd.grid.point_count, sd.lambda_grid.count)
    assert np.allclose(sd.a_minus[:, 0], np.exp(-1j * sd.lambda_grid.nodes[0] * sd.grid.x) * sd.m_minus[:, 0])
