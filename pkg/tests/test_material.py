import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mvfluid.grid import Mesh2D, Mesh3D
from mvfluid.kinematics import StatePair
from mvfluid.material import (
    GravitySpec,
    MaterialParams,
    cell_internal_energy,
    cell_kinetic_energy,
    cell_potential_energy,
    internal_energy,
    pressure,
)

RHO0, GAMMA, A_TILDE, B = 997.0, 6.0, 3.041e4, 3.0397e4
WATER = MaterialParams.from_a_tilde(RHO0, GAMMA, A_TILDE, B)


def w_from_density(rho, a, b, gamma):
    """Specific energy as a function of density, w(rho) = A/(g-1) rho^(g-1) + B/rho."""
    return a / (gamma - 1) * rho ** (gamma - 1) + b / rho


def test_params_validation():
    with pytest.raises(ValueError):
        MaterialParams(-1.0, 6.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        MaterialParams(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        MaterialParams(1.0, 2.0, -1.0, 0.0)
    assert_allclose(WATER.a_coeff, A_TILDE * RHO0**-GAMMA)
    assert_allclose(WATER.a_tilde, A_TILDE)


def test_internal_energy_examples():
    zero = MaterialParams(RHO0, GAMMA, 0.0, 0.0)
    assert internal_energy(zero, 1.7) == 0.0
    expected = A_TILDE / ((GAMMA - 1) * RHO0) + B / RHO0
    assert_allclose(internal_energy(WATER, 1.0), expected, rtol=1e-14)
    # independent route: composition with rho = rho0 / J
    for J in (0.8, 1.0, 1.3):
        assert_allclose(internal_energy(WATER, J), w_from_density(RHO0 / J, WATER.a_coeff, B, GAMMA), rtol=1e-12)
    lin = MaterialParams(RHO0, GAMMA, 0.0, RHO0)
    assert_allclose(internal_energy(lin, 2.0), 2.0)


def test_pressure_examples():
    assert pressure(WATER, 1.0) == pytest.approx(13.0, abs=1e-9)
    h = 1e-6
    fd = -RHO0 * (internal_energy(WATER, 1 + h) - internal_energy(WATER, 1 - h)) / (2 * h)
    assert_allclose(fd, 13.0, rtol=1e-4)
    balanced = MaterialParams.from_a_tilde(RHO0, GAMMA, 2.0e4, 1.0e4)
    assert_allclose(pressure(balanced, 2.0 ** (1 / GAMMA)), 0.0, atol=1e-9)
    offset = MaterialParams(RHO0, GAMMA, 0.0, 5.0)
    assert_allclose(pressure(offset, np.array([0.5, 1.0, 3.0])), -5.0)


def test_domain_errors():
    with pytest.raises(ValueError):
        internal_energy(WATER, 0.0)
    with pytest.raises(ValueError):
        pressure(WATER, -1.0)


def test_pressure_is_minus_rho0_dW_dJ_on_grid():
    J = np.linspace(0.5, 2.0, 50)
    h = 1e-6 * J
    fd = -RHO0 * (internal_energy(WATER, J + h) - internal_energy(WATER, J - h)) / (2 * h)
    # FD error is relative to the size of the two cancelling terms
    scale = A_TILDE * J**-GAMMA + B
    assert np.all(np.abs(pressure(WATER, J) - fd) <= 1e-8 * scale)


def test_cell_internal_energy_examples():
    assert_allclose(cell_internal_energy(WATER, np.ones(4)), internal_energy(WATER, 1.0))
    zero = MaterialParams(RHO0, GAMMA, 0.0, 0.0)
    assert cell_internal_energy(zero, np.ones(4)) == 0.0
    lin = MaterialParams(RHO0, GAMMA, 0.0, RHO0)
    assert_allclose(cell_internal_energy(lin, np.array([1.0, 2.0, 1.0, 2.0])), 1.5)
    assert_allclose(cell_internal_energy(lin, np.array([1.0] * 4 + [2.0] * 4)), 1.5)


def test_cell_kinetic_energy_examples():
    mesh = Mesh2D(2, 2, 0.5, 0.5)
    X = mesh.reference_positions
    dt = 0.1
    assert cell_kinetic_energy(StatePair(X, X.copy(), dt), mesh, (0, 0)) == 0.0
    c = np.array([0.3, -0.4])
    assert_allclose(cell_kinetic_energy(StatePair(X, X + dt * c, dt), mesh, (1, 0)), 0.125)
    nxt = X.copy()
    nxt[mesh.node_id((1, 1))] += dt * np.array([2.0, 0.0])
    assert_allclose(cell_kinetic_energy(StatePair(X, nxt, dt), mesh, (0, 0)), 0.5)
    mesh3 = Mesh3D(1, 1, 1, 1.0, 1.0, 1.0)
    X3 = mesh3.reference_positions
    assert_allclose(cell_kinetic_energy(StatePair(X3, X3 + dt, dt), mesh3, (0, 0, 0)), 1.5)


def test_cell_potential_energy_examples():
    mesh = Mesh2D(1, 1, 1.0, 1.0)
    X = mesh.reference_positions
    assert cell_potential_energy(GravitySpec.none(2), X, mesh, (0, 0)) == 0.0
    lifted = X.copy()
    lifted[:, 1] = 1.0
    assert_allclose(cell_potential_energy(GravitySpec((0.0, 9.81)), lifted, mesh, (0, 0)), 9.81)
    assert_allclose(cell_potential_energy(GravitySpec((0.0, 1.0)), X, mesh, (0, 0)), 0.5)


def test_gravity_spec():
    g = GravitySpec((0.0, 9.81))
    assert not g.is_zero
    assert GravitySpec.none(3).is_zero
    with pytest.raises(ValueError):
        GravitySpec((np.nan, 0.0))


@settings(max_examples=60, deadline=None)
@given(
    st.floats(1.1, 8.0),
    st.floats(1e-3, 1e5),
    st.floats(0.0, 1e5),
    st.floats(0.3, 3.0),
)
def test_pressure_identity_property(gamma, a_tilde, b, J):
    mat = MaterialParams.from_a_tilde(1000.0, gamma, a_tilde, b)
    h = 1e-6 * J
    fd = -mat.rho0 * (internal_energy(mat, J + h) - internal_energy(mat, J - h)) / (2 * h)
    assert abs(pressure(mat, J) - fd) <= 1e-7 * (a_tilde * J**-gamma + b)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.1, 8.0), st.floats(1e-3, 1e5), st.floats(0.3, 3.0))
def test_internal_energy_convex(gamma, a_tilde, J):
    mat = MaterialParams.from_a_tilde(1000.0, gamma, a_tilde, 10.0)
    h = 1e-3 * J
    second = internal_energy(mat, J + h) - 2 * internal_energy(mat, J) + internal_energy(mat, J - h)
    assert second >= -1e-12 * abs(internal_energy(mat, J))


@settings(max_examples=30, deadline=None)
@given(st.permutations([0.8, 0.9, 1.1, 1.3]))
def test_cell_internal_energy_permutation_invariant(perm):
    assert_allclose(cell_internal_energy(WATER, np.array(perm)), cell_internal_energy(WATER, np.array([0.8, 0.9, 1.1, 1.3])))
