import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mvfluid.constraints import (
    BoxContact,
    HalfSpaceContact,
    IncompressibilityPenalty,
    contact_energy_and_force,
    contact_evaluate,
    contact_forces,
    incompressibility_energy,
    incompressibility_pressure,
    max_penetration,
)


def test_incompressibility_energy_examples():
    pen = IncompressibilityPenalty(100.0)
    assert incompressibility_energy(pen, np.ones(4)) == 0.0
    assert incompressibility_energy(IncompressibilityPenalty(0.0), np.array([1.2, 0.8, 1.0, 1.0])) == 0.0
    assert_allclose(incompressibility_energy(pen, np.array([1.1, 0.9, 1.0, 1.0])), 0.25)
    # 3D averages over eight corners
    assert_allclose(incompressibility_energy(pen, np.array([1.1, 0.9] + [1.0] * 6)), 0.125)


def test_incompressibility_pressure_examples():
    pen = IncompressibilityPenalty(1e6)
    assert incompressibility_pressure(pen, 1.0) == 0.0
    assert_allclose(incompressibility_pressure(pen, 1.05), -5e4)
    assert_allclose(incompressibility_pressure(pen, 0.95), 5e4)
    with pytest.raises(ValueError):
        IncompressibilityPenalty(-1.0)


def test_floor_examples():
    floor = HalfSpaceContact.floor(2, 0.0, 4.8e10)
    psi, _ = contact_evaluate(floor, (0.3, 0.2))
    assert_allclose(psi, -0.2)
    psi, grad = contact_evaluate(floor, (0.3, -0.05))
    assert_allclose(psi, 0.05)
    assert_allclose(grad, (0.0, -1.0))
    e, f = contact_energy_and_force(floor, (0.3, -0.05), 1.0)
    assert_allclose(f, (0.0, 2.4e9))
    assert_allclose(e, 0.5 * 4.8e10 * 0.05**2)
    e, f = contact_energy_and_force(floor, (0.3, 0.2), 1.0)
    assert e == 0.0 and np.all(f == 0.0)


def test_box_depth_and_direction():
    box = BoxContact((1.0, 0.0), (2.0, 1.0), 1e3)
    psi, grad = contact_evaluate(box, (1.1, 0.5))
    assert_allclose(psi, 0.1)
    # the gradient of Psi points into the box, so the force pushes out through x = 1
    assert_allclose(grad, (1.0, 0.0))
    _, f = contact_energy_and_force(box, (1.1, 0.5), 1.0)
    assert f[0] < 0 and f[1] == 0
    psi, grad = contact_evaluate(box, (2.5, 0.5))
    assert_allclose(psi, -0.5)
    assert_allclose(grad, 0.0)
    # tie between the x = 1 and y = 0 faces goes to the lower axis
    _, grad = contact_evaluate(box, (1.2, 0.2))
    assert_allclose(grad, (1.0, 0.0))


def test_energy_continuity_at_activation():
    floor = HalfSpaceContact.floor(3, 0.0, 1e6)
    for eps in (1e-3, 1e-6, 1e-9):
        e, f = contact_energy_and_force(floor, (0.0, 0.0, -eps), 1.0)
        assert e <= 0.5e6 * eps**2 * (1 + 1e-12)
    e, f = contact_energy_and_force(floor, (0.0, 0.0, 0.0), 1.0)
    assert e == 0.0 and np.all(f == 0.0)


def test_contact_validation():
    with pytest.raises(ValueError):
        HalfSpaceContact((1.0, 1.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        HalfSpaceContact((0.0, 1.0), 0.0, -1.0)
    with pytest.raises(ValueError):
        BoxContact((1.0, 0.0), (0.5, 1.0), 1.0)


def test_max_penetration_and_batch_forces():
    floor = HalfSpaceContact.floor(2, 0.0, 10.0)
    pts = np.array([[0.0, 0.5], [0.0, -0.1], [1.0, -0.3]])
    assert_allclose(max_penetration([floor], pts), 0.3)
    energy, forces = contact_forces([floor], pts, 2.0)
    assert_allclose(energy, 2.0 * 0.5 * 10 * (0.01 + 0.09))
    assert_allclose(forces, [[0, 0], [0, 2.0], [0, 6.0]])


points2 = st.tuples(st.floats(-1, 3), st.floats(-1, 2))


@settings(max_examples=100, deadline=None)
@given(points2)
def test_contact_force_is_energy_gradient(p):
    """force = -measure * d(K Psi_+^2 / 2)/dphi away from Psi = 0 and face ties."""
    box = BoxContact((1.0, 0.0), (2.0, 1.0), 50.0)
    floor = HalfSpaceContact((0.6, 0.8), 0.5, 20.0)
    measure = 0.3
    for c in (box, floor):
        x = np.array(p, dtype=float)
        psi, _ = contact_evaluate(c, x)
        if abs(psi) < 1e-4:
            continue
        if isinstance(c, BoxContact):
            dist = np.concatenate([x - c.lower, np.asarray(c.upper) - x])
            srt = np.sort(dist)
            if psi > 0 and srt[1] - srt[0] < 1e-4:
                continue
        _, f = contact_energy_and_force(c, x, measure)
        h = 1e-7
        fd = np.zeros(2)
        for k in range(2):
            e = np.eye(2)[k] * h
            fd[k] = -measure * (contact_energy_and_force(c, x + e, 1.0)[0] - contact_energy_and_force(c, x - e, 1.0)[0]) / (2 * h)
        assert_allclose(f, fd, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(f).max()))


@settings(max_examples=50, deadline=None)
@given(st.floats(1e3, 1e9), st.floats(1e-6, 1e-2))
def test_static_penetration_scales_like_inverse_stiffness(K, load):
    """Force balance of a node pressed into the floor: K * Psi = load."""
    floor = HalfSpaceContact.floor(2, 0.0, K)
    depth = load / K
    _, f = contact_energy_and_force(floor, (0.0, -depth), 1.0)
    assert_allclose(f[1], load, rtol=1e-9)
