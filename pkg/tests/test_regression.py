import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from resonance_rls.errors import InputError
from resonance_rls.modeling import ModeParameters, eval_driveline_response, eval_siso_response
from resonance_rls.regression import (
    ParameterVector,
    Variant,
    band_points,
    build_driveline_point,
    build_siso_point,
    stack,
)
from resonance_rls.signals import FrequencyBand, SpectrumFrame


def _symbolic_rows(variant):
    """Expand the complex model equation with sympy and read off z and H."""
    w = sp.symbols("w", positive=True)
    a, b, cr, ci, dr, di, yr, yi, ur, ui = sp.symbols("a b cr ci dr di yr yi ur ui", real=True)
    den = -(w**2) + 2 * sp.I * a * w + b
    Y, U = yr + sp.I * yi, ur + sp.I * ui
    if variant is Variant.SISO:
        params = [a, b, cr, ci]
        residual = sp.expand(den * Y - (cr + sp.I * ci) * U)
    else:
        params = [a, b, cr, ci, dr, di]
        # same equation with both sides swapped, which is how the driveline rows are laid out
        residual = sp.expand((cr + sp.I * ci) * U + (dr + sp.I * di) - sp.I * w * den * Y)
    rows = []
    for part in (sp.re(residual), sp.im(residual)):
        # residual = (linear in params) - z  ->  z = H x
        coeffs = [sp.diff(part, p) for p in params]
        const = sp.simplify(part - sum(c * p for c, p in zip(coeffs, params)))
        rows.append((-const, coeffs))
    fn = sp.lambdify((w, yr, yi, ur, ui), [[r[0] for r in rows], [r[1] for r in rows]], "numpy")
    return fn


SYM_SISO = _symbolic_rows(Variant.SISO)
SYM_DRIVE = _symbolic_rows(Variant.DRIVELINE)

finite = st.floats(-1e3, 1e3)
complexes = st.builds(complex, finite, finite)


@given(st.floats(0.1, 500.0), complexes, complexes)
def test_siso_rows_match_symbolic_expansion(w, Y, U):
    z_sym, H_sym = SYM_SISO(w, Y.real, Y.imag, U.real, U.imag)
    pt = build_siso_point(w, Y, U)
    assert np.allclose(pt.z, np.array(z_sym, float), rtol=1e-12, atol=1e-9)
    assert np.allclose(pt.H, np.array(H_sym, float), rtol=1e-12, atol=1e-9)


@given(st.floats(0.1, 500.0), complexes, complexes)
def test_driveline_rows_match_symbolic_expansion(w, W, T):
    z_sym, H_sym = SYM_DRIVE(w, W.real, W.imag, T.real, T.imag)
    pt = build_driveline_point(w, W, T)
    assert np.allclose(pt.z, np.array(z_sym, float), rtol=1e-12, atol=1e-6)
    assert np.allclose(pt.H, np.array(H_sym, float), rtol=1e-12, atol=1e-6)


def test_siso_structural_zeros():
    pt = build_siso_point(3.0, 0j, 2 - 5j)
    assert np.array_equal(pt.z, [0, 0])
    assert np.array_equal(pt.H, [[0, 0, -2, -5], [0, 0, 5, -2]])


def test_siso_worked_example():
    Y = (1 - 4j) / 17
    pt = build_siso_point(2.0, Y, 1 + 0j)
    assert np.allclose(pt.z, [4 / 17, -16 / 17], rtol=1e-14)
    assert np.allclose(pt.H[0], [16 / 17, 1 / 17, -1, 0], rtol=1e-14)
    assert np.allclose(pt.H @ [1, 5, 1, 0], pt.z, atol=1e-15)


@given(st.floats(-100, 100).filter(lambda s: abs(s) > 1e-3), st.floats(0.5, 50), complexes, complexes)
def test_siso_scaling(s, w, Y, U):
    x = np.array([0.3, 7.0, 1.5, -0.4])
    base = build_siso_point(w, Y, U)
    scaled = build_siso_point(w, s * Y, s * U)
    assert np.allclose(scaled.z, s * base.z, rtol=1e-12, atol=1e-9)
    assert np.allclose(scaled.H[:, :2], s * base.H[:, :2], rtol=1e-12, atol=1e-9)
    assert np.allclose(scaled.residual(x), s * base.residual(x), rtol=1e-9, atol=1e-6)


def test_driveline_structural():
    pt = build_driveline_point(4.0, 0j, 1 + 0j)
    assert np.array_equal(pt.z, [0, 0])
    assert np.array_equal(pt.H, [[0, 0, 1, 0, 1, 0], [0, 0, 0, 1, 0, 1]])


def test_driveline_worked_example():
    W = (-4 - 1j) / 34
    pt = build_driveline_point(2.0, W, 1 + 0j)
    assert np.abs(pt.residual([1, 5, 1, 0, 0, 0])).max() <= 1e-12


def test_driveline_d_columns():
    pt = build_driveline_point(3.0, 0.2 - 0.1j, 0.5 + 0.5j)
    x = np.array([0.5, 9.0, 1.0, 2.0, 0.0, 0.0])
    dx = x.copy()
    dx[4:] = [0.25, -1.5]
    assert np.allclose(pt.H @ dx - pt.H @ x, [0.25, -1.5], atol=1e-12)


def test_dc_and_nonfinite_rejected():
    with pytest.raises(InputError):
        build_driveline_point(0.0, 1j, 1 + 0j)
    with pytest.raises(InputError):
        build_siso_point(1.0, complex("nan"), 1 + 0j)
    with pytest.raises(InputError):
        build_siso_point(-1.0, 1j, 1 + 0j)


def test_parameter_vector():
    p = ModeParameters(0.5, 30.0, 2 - 1j)
    x = ParameterVector.from_mode(p, Variant.DRIVELINE, d=0.5 + 0.25j)
    assert list(x.entries) == [0.5, 30.0, 2.0, -1.0, 0.5, 0.25]
    assert x.mode == p
    assert x.driveline_constants.d == 0.5 + 0.25j
    with pytest.raises(InputError):
        ParameterVector(np.zeros(5), Variant.SISO)


def _frames(freqs, U, Y):
    return SpectrumFrame(U, freqs, 1.0), SpectrumFrame(Y, freqs, 1.0)


def test_band_point_count_and_order():
    freqs = np.arange(0, 50.5, 0.5)
    U = np.ones(freqs.size, complex)
    u, y = _frames(freqs, U, 0.1 * U)
    pts = band_points(u, y, FrequencyBand(8, 12), "siso")
    assert len(pts) == 9
    assert np.allclose([p.omega / (2 * math.pi) for p in pts], np.arange(8, 12.5, 0.5))
    with pytest.raises(InputError, match="empty band"):
        band_points(u, y, FrequencyBand(8.1, 8.4), "siso")
    other = SpectrumFrame(U, freqs * 1.01, 1.0)
    with pytest.raises(InputError, match="different frequency grids"):
        band_points(u, other, FrequencyBand(8, 12), "siso")


@pytest.mark.parametrize("variant", list(Variant))
def test_band_points_exact_model(variant, rng):
    p = ModeParameters.from_frequency(10.0, 0.05, 0.7 - 2j)
    d = 0.3 + 0.1j
    freqs = np.arange(0, 40, 0.25)
    U = rng.normal(size=freqs.size) + 1j * rng.normal(size=freqs.size)
    w = 2 * math.pi * freqs[1:]
    if variant is Variant.SISO:
        Y = np.concatenate([[0], eval_siso_response(p, w) * U[1:]])
        x = ParameterVector.from_mode(p, variant).entries
    else:
        # load term enters as d / (jw * den)
        Y = np.concatenate([[0], eval_driveline_response(p, w) * U[1:] + d / (1j * w * p.denominator(w))])
        x = ParameterVector.from_mode(p, variant, d).entries
    u, y = _frames(freqs, U, Y)
    for pt in band_points(u, y, FrequencyBand(8, 12), variant):
        assert np.linalg.norm(pt.residual(x)) <= 1e-10 * max(1.0, np.linalg.norm(pt.z))


@given(st.floats(1.0, 50.0), st.floats(0.0, 0.5), st.floats(-3, 3), st.floats(-3, 3))
def test_complex_residual_reconstruction(fr, zeta, cr, ci):
    # rows (re, im) rebuild the complex residual of the model equation
    p = ModeParameters.from_frequency(fr, zeta, complex(cr, ci))
    w = 2 * math.pi * fr * 1.1
    Y, U = 0.3 - 0.8j, 1.2 + 0.4j
    x = ParameterVector.from_mode(p, Variant.SISO).entries
    r = build_siso_point(w, Y, U).residual(x)
    direct = p.c * U - p.denominator(w) * Y
    assert complex(r[0], r[1]) == pytest.approx(direct, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("variant,n_freq", [(Variant.SISO, 2), (Variant.DRIVELINE, 3)])
def test_identifiability(variant, n_freq, rng):
    for _ in range(50):
        w = rng.uniform(1, 100, n_freq)
        Y = rng.normal(size=n_freq) + 1j * rng.normal(size=n_freq)
        U = rng.normal(size=n_freq) + 1j * rng.normal(size=n_freq)
        build = build_siso_point if variant is Variant.SISO else build_driveline_point
        _, H = stack([build(*args) for args in zip(w, Y, U)])
        sv = np.linalg.svd(H, compute_uv=False)
        assert sv.min() > 1e-8 * sv.max()
        assert np.linalg.matrix_rank(H) == variant.n_params
