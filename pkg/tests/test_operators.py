import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad

from freecircle.measures import FourierSeries
from freecircle.operators import (
    E,
    L,
    M,
    N,
    OperatorKind,
    TensorDerivativeNorms,
    U,
    V,
    dc_norm_sq,
    houdre_kagan_bounds,
    kernel_form_N,
    project_constants,
    quadratic_form,
)

from conftest import complex_series


def _close(a, b, tol=1e-12):
    n = max(a.half_bandwidth, b.half_bandwidth)
    return np.max(np.abs(a.padded(n).coeffs - b.padded(n).coeffs)) <= tol


def _swap(f):
    """``z -> 1/z`` on the coefficients."""
    return FourierSeries(f.coeffs[::-1])


@given(complex_series())
def test_E_inverts_N_off_constants(f):
    target = f - project_constants(f)
    assert _close(E(N(f)), target)
    assert _close(N(E(f)), target)


@given(complex_series())
def test_L_is_N_squared_and_M_is_N_minus_one(f):
    assert _close(L(f), N(N(f)))
    assert _close(M(f), N(f) - (f - project_constants(f)))


@given(complex_series(), complex_series())
def test_U_V_adjoint(f, g):
    n = max(f.half_bandwidth, g.half_bandwidth) + 1
    assert U(f).inner(g) == pytest.approx(f.inner(V(g)), abs=1e-12)
    assert V(g.padded(n)).inner(f) == pytest.approx(g.inner(U(f)), abs=1e-12)


@given(complex_series())
def test_shift_identities_with_low_mode_corrections(f):
    # the shift table fixes these forms exactly; the constant mode and the
    # pair z, 1/z are what separate them from VU = I, UV = I - Pi, VNU = N + I
    pi = project_constants(f)
    assert _close(V(U(f)), f + pi)
    uv = U(V(f))
    if f.half_bandwidth:
        # modes +1 and -1 are swapped into each other on top of I - Pi
        corr = FourierSeries.from_dict({1: f.coeff(-1), -1: f.coeff(1)})
        assert _close(uv, f - pi + corr)
    else:
        assert _close(uv, FourierSeries.zeros(0))
    assert _close(V(N(U(f))), N(f) + f + pi)


def test_shift_table():
    one = FourierSeries.constant(1.0)
    assert _close(U(one), FourierSeries.from_dict({1: 1.0, -1: 1.0}))
    assert _close(U(FourierSeries.monomial(2)), FourierSeries.monomial(3))
    assert _close(U(FourierSeries.monomial(-2)), FourierSeries.monomial(-3))
    assert _close(V(FourierSeries.monomial(1)), one)
    assert _close(V(one), FourierSeries.zeros(0))


def test_eigenvalues():
    n = np.array([-3, -1, 0, 1, 4])
    assert np.allclose(OperatorKind.E.eigenvalue(n), [1 / 3, 1, 0, 1, 0.25])
    assert np.allclose(OperatorKind.M.eigenvalue(n), [2, 0, 0, 0, 3])
    with pytest.raises(ValueError):
        OperatorKind.U.eigenvalue(n)


def test_kernel_form_against_dblquad():
    phi = FourierSeries.from_dict({1: 0.5, -1: 0.5, 2: 0.2j, -2: -0.2j})
    psi = FourierSeries.from_dict({1: 0.3, -1: 0.3, 2: 0.1, -2: 0.1})

    def integrand(y, x):
        if abs(x - y) < 1e-12:
            return 0.0
        zx, zy = np.exp(1j * x), np.exp(1j * y)
        a = phi(np.array([x]))[0] - phi(np.array([y]))[0]
        b = psi(np.array([x]))[0] - psi(np.array([y]))[0]
        return float(np.real(a * np.conj(b)) / abs(zx - zy) ** 2)

    val = dblquad(integrand, 0, 2 * np.pi, 0, 2 * np.pi, epsabs=1e-10)[0] / (4 * np.pi ** 2)
    assert kernel_form_N(phi, psi).real == pytest.approx(val, abs=1e-8)
    assert kernel_form_N(phi, psi).real == pytest.approx(quadratic_form("N", phi, psi).real, abs=1e-12)


@given(complex_series(), complex_series())
def test_kernel_form_spectral(phi, psi):
    assert np.isclose(kernel_form_N(phi, psi), quadratic_form("N", phi, psi), atol=1e-11)


def test_dc_norm_formula():
    phi = FourierSeries.from_dict({3: 1.0, -2: 2.0})
    # |a_3|^2 C(2, 1) + |a_-2|^2 C(1, 1)
    assert dc_norm_sq(phi, 2) == pytest.approx(2 + 4)
    assert dc_norm_sq(phi, 1) == pytest.approx(1 + 4)
    assert dc_norm_sq(FourierSeries.monomial(1), 1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        dc_norm_sq(phi, 0)


def test_tensor_norms():
    phi = FourierSeries.from_dict({4: 1.0})
    t = TensorDerivativeNorms.of(phi)
    assert t.degree == 4
    assert np.allclose(t.norms, [1, 3, 3, 1])


@given(complex_series(max_degree=10), st.integers(1, 6))
def test_houdre_kagan_bracket(phi, k):
    lower, upper = houdre_kagan_bounds(phi, k)
    target = quadratic_form("N", phi).real
    scale = max(1.0, abs(target))
    assert lower <= target + 1e-9 * scale
    assert target <= upper + 1e-9 * scale
    d = phi.degree()
    if 2 * k >= d:
        assert lower == pytest.approx(target, abs=1e-10 * scale)
    if 2 * k - 1 >= d:
        assert upper == pytest.approx(target, abs=1e-10 * scale)
