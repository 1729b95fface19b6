import numpy as np
import pytest
from scipy.integrate import quad

from bolab import data
from bolab.errors import GridMismatchError, InvalidParameterError
from bolab.field_grid import (HardyField, RealField, abs_derivative, derivative, field_from_json,
                              field_from_text, field_to_json, field_to_text, free_evolve,
                              hilbert_transform, make_grid, szego_project)


def test_make_grid_spacing():
    g = make_grid(32, 512)
    assert g.freq_spacing == pytest.approx(np.pi / 32)
    assert g.freq_spacing == pytest.approx(0.0982, abs=1e-4)


def test_make_grid_points():
    g = make_grid(1, 8)
    np.testing.assert_allclose(g.x, [-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75])


@pytest.mark.parametrize("L, M", [(-1, 8), (0, 8), (1, 7), (1, 6), (1, 9.5)])
def test_make_grid_rejects_bad_parameters(L, M):
    with pytest.raises(InvalidParameterError):
        make_grid(L, M)


def test_grid_is_hashable_and_compares_by_value():
    assert make_grid(2, 16) == make_grid(2.0, 16)
    assert len({make_grid(2, 16), make_grid(2, 16)}) == 1


def test_projection_of_soliton_matches_residue_oracle(grid):
    # Pi R_i = i/(x+i) has transform 2 pi exp(-xi) on xi > 0.  Truncating R_i
    # to the box changes each coefficient by at most int_{|x|>L} R_i = 4/L.
    f = szego_project(data.soliton(grid, 1j))
    exact = 2 * np.pi * np.exp(-grid.hardy_xi)
    assert np.max(np.abs(f.coefficients - exact)) < 4.0 / grid.half_width


def test_projection_of_cosine_keeps_single_mode():
    g = make_grid(8, 64)
    f = szego_project(RealField(g, np.cos(np.pi * g.x / g.half_width)))
    normalized = f.coefficients / (2 * g.half_width)
    assert normalized[1] == pytest.approx(0.5, abs=1e-14)
    assert np.max(np.abs(np.delete(normalized, 1))) < 1e-14


def test_projection_is_idempotent_on_hardy_fields(grid):
    f = szego_project(data.gaussian(grid))
    assert szego_project(f) is f
    again = szego_project(f.values(), grid)
    # re-projecting physical samples reproduces every positive mode; the zero
    # mode of a sampled Hardy function is the midpoint value I+/2
    np.testing.assert_allclose(again.coefficients[1:], f.coefficients[1:], atol=1e-12)
    assert again.coefficients[0] == pytest.approx(0.5 * f.coefficients[0], abs=1e-12)


def test_projection_is_self_adjoint(grid, rng):
    f = rng.standard_normal(grid.point_count) + 1j * rng.standard_normal(grid.point_count)
    g = rng.standard_normal(grid.point_count) + 1j * rng.standard_normal(grid.point_count)
    pf = szego_project(f, grid).values()
    pg = szego_project(g, grid).values()
    h = grid.spacing
    assert h * np.vdot(g, pf) == pytest.approx(h * np.vdot(pg, f), rel=1e-12)


def test_discrete_plancherel(grid, rng):
    v = rng.standard_normal(grid.point_count)
    spec = grid.forward(v)
    assert grid.spacing * np.sum(v ** 2) == pytest.approx(
        np.sum(np.abs(spec) ** 2) / (2 * grid.half_width), rel=1e-12)


def test_real_field_reconstructed_from_hardy_part(grid, rng):
    v = rng.standard_normal(grid.point_count)
    spec = grid.forward(v)
    spec[grid.nyquist_index] = 0
    v = grid.inverse(spec).real
    p = szego_project(RealField(grid, v)).values()
    np.testing.assert_allclose(p + np.conj(p), v, atol=1e-12)


def test_hardy_norm_is_half_line_trapezoid(grid):
    # The Hardy norm is the trapezoid rule for (1/2pi) int_0^inf |f_hat|^2.
    # Physical samples carry the midpoint I+/2 in the zero mode, so the two
    # norms differ by exactly |I+|^2 / 8L.
    f = szego_project(data.gaussian(grid))
    vals = f.values()
    physical = grid.spacing * np.sum(np.abs(vals) ** 2)
    gap = abs(f.i_plus()) ** 2 / (8 * grid.half_width)
    assert f.norm() ** 2 == pytest.approx(physical + gap, rel=1e-12)


def test_hardy_extension_of_soliton():
    g = make_grid(256, 8192)
    f = HardyField(g, 2 * np.pi * np.exp(-g.hardy_xi))
    # i/(z+i) at z = i is 1/2; the trapezoid in xi is exact up to O(dxi^2)
    assert f.evaluate(1j) == pytest.approx(0.5, abs=1e-4)


def test_hilbert_of_sine():
    g = make_grid(4, 32)
    out = hilbert_transform(RealField(g, np.sin(np.pi * g.x / 4)))
    np.testing.assert_allclose(out.values, -np.cos(np.pi * g.x / 4), atol=1e-14)


def test_hilbert_of_constant_is_zero():
    g = make_grid(4, 32)
    out = hilbert_transform(RealField(g, np.full(32, 3.0)))
    assert np.max(np.abs(out.values)) < 1e-14


def test_hilbert_is_an_involution_up_to_sign(grid):
    f = data.gaussian(grid) - data.gaussian(grid, 0.3, 2.0, 5.0)
    hh = hilbert_transform(hilbert_transform(f))
    np.testing.assert_allclose(hh.values, -f.values, atol=1e-12)


def test_abs_derivative_of_cosine():
    g = make_grid(4, 32)
    xi1 = g.freq_spacing
    out = abs_derivative(RealField(g, np.cos(xi1 * g.x)))
    np.testing.assert_allclose(out.values, xi1 * np.cos(xi1 * g.x), atol=1e-14)


def test_abs_derivative_two_ways(grid):
    f = data.soliton(grid, 1j)
    np.testing.assert_allclose(abs_derivative(f).values,
                               hilbert_transform(derivative(f)).values, atol=1e-12)


def test_free_evolve_identity_norm_and_group(grid):
    w = data.gaussian(grid)
    np.testing.assert_allclose(free_evolve(w, 0.0).values, w.values, atol=1e-15)
    for t in (0.5, 3.0, 11.0):
        assert free_evolve(w, t).norm() == pytest.approx(w.norm(), rel=1e-12)
    a = free_evolve(free_evolve(w, 1.3), 2.1)
    b = free_evolve(w, 3.4)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)


def test_free_evolve_matches_oscillatory_quadrature():
    # the kink of xi|xi| at 0 gives the free wave algebraic tails, so the box
    # must be wide enough for the periodic images to be negligible
    g = make_grid(1024, 16384)
    amp, width, t = 0.3, 2.0, 10.0
    w = data.gaussian(g, amp, width)
    out = free_evolve(w, t)
    assert out.sup_norm() < w.sup_norm()

    def exact(x):
        def integrand(xi):
            v = amp * width * np.sqrt(np.pi) * np.exp(-(width * xi) ** 2 / 4)
            return v * np.cos(t * xi * abs(xi) + xi * x)
        # split at the kink of xi|xi| so the adaptive rule sees smooth pieces
        pieces = [quad(integrand, a, b, limit=1000, epsabs=1e-14, epsrel=1e-13)[0]
                  for a, b in ((-12, -4), (-4, 0), (0, 4), (4, 12))]
        return sum(pieces) / (2 * np.pi)

    for k in (8192, 8192 + 80, 8192 - 80, 8192 + 320, 8192 - 400):
        ref = exact(g.x[k])
        assert abs(out.values[k] - ref) < 1e-6 * max(abs(ref), 1e-3)


def test_text_and_json_round_trip(grid, rng):
    f = RealField(grid, rng.standard_normal(grid.point_count) / 3)
    back = field_from_text(field_to_text(f))
    assert back.grid == grid
    np.testing.assert_array_equal(back.values, f.values)
    back = field_from_json(field_to_json(f))
    np.testing.assert_array_equal(back.values, f.values)
    h = szego_project(f)
    back = field_from_json(field_to_json(h))
    np.testing.assert_array_equal(back.coefficients, h.coefficients)


def test_grid_mismatch_is_reported():
    a = RealField(make_grid(2, 16), np.zeros(16))
    b = RealField(make_grid(3, 16), np.zeros(16))
    with pytest.raises(GridMismatchError):
        a + b


def test_reflection_maps_grid_onto_itself():
    g = make_grid(4, 16)
    f = RealField(g, g.x ** 3 + g.x)
    r = f.reflected()
    np.testing.assert_allclose(r.values[1:], -f.values[1:])
