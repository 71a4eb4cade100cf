import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mvfluid.config import (
    AtRest,
    BoundaryVelocityProfile,
    InwardPerturbation,
    NodeDisplacement,
    ScenarioConfig,
    config_from_dict,
    parse_config,
)
from mvfluid.constraints import BoxContact, HalfSpaceContact
from mvfluid.errors import ConfigError
from mvfluid.grid import Mesh2D
from mvfluid.scenarios import BUILTINS, STUDIES, builtin, study

MINIMAL = {
    "mesh": {"cells": [4, 4], "spacing": [0.25, 0.25]},
    "material": {"rho0": 997, "gamma": 6, "a_tilde": 3.041e4, "b": 3.0397e4},
    "dt": 1e-3,
    "steps": 10,
}


def test_minimal_document_gets_defaults():
    cfg = config_from_dict(MINIMAL)
    assert cfg.output.diagnostics_stride == 10
    assert cfg.output.snapshot_stride == 100
    assert cfg.integrator == "explicit"
    assert isinstance(cfg.initial, AtRest)
    assert cfg.gravity.is_zero
    assert_allclose(cfg.material.a_coeff, 3.041e4 * 997.0**-6)


def test_gravity_default_points_down():
    cfg = config_from_dict({**MINIMAL, "gravity": {"enabled": True}})
    assert_allclose(cfg.gravity.g, (0.0, 9.81))
    cfg = config_from_dict({**MINIMAL, "gravity": True})
    assert_allclose(cfg.gravity.g, (0.0, 9.81))
    three = {**MINIMAL, "mesh": {"cells": [2, 2, 2], "spacing": [0.5, 0.5, 0.5]}, "gravity": {"enabled": True}}
    assert_allclose(config_from_dict(three).gravity.g, (0.0, 0.0, 9.81))


@pytest.mark.parametrize(
    "patch",
    [
        {"dt": -1e-3},
        {"steps": 0},
        {"steps": 2.5},
        {"material": {"rho0": 997, "gamma": 0.5}},
        {"mesh": {"extent": [1.0, 1.0], "spacing": [0.3, 0.3]}},
        {"mesh": {"cells": [4, 4]}},
        {"dimension": 3},
        {"integrator": {"type": "rk4"}},
        {"constraints": {"contacts": [{"type": "sphere", "stiffness": 1.0}]}},
        {"initial": {"type": "perturbation", "nodes": [[9, 9]]}},
        {"gravity": {"vector": [0.0, 0.0, 9.81]}},
    ],
)
def test_validation_errors(patch):
    with pytest.raises(ConfigError):
        config_from_dict({**MINIMAL, **patch})


def test_missing_required_field():
    doc = dict(MINIMAL)
    del doc["dt"]
    with pytest.raises(ConfigError, match="dt"):
        config_from_dict(doc)


def test_parse_file_and_json_errors(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(MINIMAL))
    assert parse_config(path).steps == 10
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "dt": 1e-3,\n  "steps":\n}')
    with pytest.raises(ConfigError, match=r"bad.json:4:"):
        parse_config(bad)
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.json")


def test_builtin_name_bypasses_file_parsing():
    cfg = parse_config("example1-baro")
    assert cfg.name == "example1-baro"
    assert cfg.mesh.cells == (14, 14)


def test_full_round_trip():
    doc = {
        "name": "rt",
        "dimension": 2,
        "mesh": {"extent": [2.0, 0.4], "spacing": [0.0625, 0.4 / 12]},
        "material": {"rho0": 997, "gamma": 6, "a": 1e-14, "b": 3.0},
        "gravity": {"enabled": True},
        "constraints": {
            "r": 1e5,
            "contacts": [
                {"type": "floor", "height": 0.0, "stiffness": 4.8e10},
                {"type": "box", "lower": [2.5, -0.5], "upper": [3.0, 0.3], "stiffness": 4.8e6},
                {"type": "half-space", "normal": [1.0, 0.0], "offset": 3.0, "stiffness": 1.0},
            ],
        },
        "dt": 1e-4,
        "steps": 5,
        "integrator": {"type": "midpoint", "tolerance": 1e-9, "max_iterations": 20},
        "initial": {"type": "boundary-velocity", "axis": 1, "side": "lower", "slope": [0.0, 0.163]},
        "output": {"snapshot_stride": 2, "diagnostics_stride": 1},
    }
    cfg = config_from_dict(doc)
    assert cfg.mesh.cells == (32, 12)
    assert isinstance(cfg.constraints.contacts[0], HalfSpaceContact)
    assert isinstance(cfg.constraints.contacts[1], BoxContact)
    assert cfg.solver.max_iterations == 20
    again = config_from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    for name in BUILTINS:
        b = builtin(name)
        assert config_from_dict(json.loads(json.dumps(b.to_dict()))) == b


def test_initial_conditions():
    mesh = Mesh2D(4, 4, 0.25, 0.25)
    X = mesh.reference_positions
    pair = AtRest().initial_pair(mesh, 0.1)
    assert_allclose(pair.prev, X)
    assert_allclose(pair.velocity, 0.0)
    disp = NodeDisplacement((((1, 1), (0.01, -0.02)),))
    pair = disp.initial_pair(mesh, 0.1)
    assert_allclose(pair.prev, X)
    assert_allclose(pair.next[mesh.node_id((1, 1))] - X[mesh.node_id((1, 1))], (0.01, -0.02))
    pert = InwardPerturbation(((1, 0), (3, 4)), 0.1).as_displacement(mesh)
    d = dict(pert.displacements)
    assert_allclose(d[(1, 0)], 0.1 * 0.25 / np.sqrt(2) * np.array([1, 1]))
    assert_allclose(d[(3, 4)], -0.1 * 0.25 / np.sqrt(2) * np.array([1, 1]))
    prof = BoundaryVelocityProfile(axis=1, side="lower", index_axis=0, slope=(0.0, 0.163))
    v = prof.velocity(mesh)
    assert_allclose(v[mesh.node_id((3, 0))], (0.0, 0.489))
    assert_allclose(v[mesh.node_id((3, 1))], 0.0)
    with pytest.raises((ValueError, IndexError)):
        NodeDisplacement((((9, 9), (0.0, 0.0)),)).initial_pair(mesh, 0.1)


def test_builtin_constants_table():
    """Builtins encode the reference experiment parameters."""
    table = {
        "example1-baro": dict(cells=(14, 14), ext=(1.0, 1.0), dt=1e-3, T=6.0, r=0.0, g=False, gamma=6.0),
        "example1-r1e6": dict(cells=(14, 14), ext=(1.0, 1.0), dt=1e-3, T=6.0, r=1e6, g=False, gamma=6.0),
        "example1-r1e7": dict(cells=(14, 14), ext=(1.0, 1.0), dt=5e-4, T=6.0, r=1e7, g=False, gamma=6.0),
        "example2-impact": dict(cells=(32, 12), ext=(2.0, 0.4), dt=1e-4, T=2.0, r=0.0, g=True, gamma=6.0),
        "example3-baro": dict(cells=(6, 6, 6), ext=(2.0, 2.0, 2.0), dt=1e-3, T=3.0, r=0.0, g=False, gamma=6.0),
        "example3-r1e5": dict(cells=(6, 6, 6), ext=(2.0, 2.0, 2.0), dt=1e-3, T=3.0, r=1e5, g=False, gamma=6.0),
        "example3-r1e7": dict(cells=(6, 6, 6), ext=(2.0, 2.0, 2.0), dt=1e-3, T=3.0, r=1e7, g=False, gamma=6.0),
        "example4-impact": dict(cells=(16, 5, 4), ext=(1.6, 1.0, 0.4), dt=5e-5, T=1.4, r=0.0, g=True, gamma=7.0),
    }
    for name, row in table.items():
        cfg = builtin(name)
        assert cfg.mesh.cells == row["cells"], name
        assert_allclose(cfg.mesh.extent, row["ext"], err_msg=name)
        assert cfg.dt == row["dt"], name
        assert_allclose(cfg.duration, row["T"], err_msg=name)
        assert cfg.constraints.incompressibility.r == row["r"], name
        assert (not cfg.gravity.is_zero) == row["g"], name
        assert cfg.material.rho0 == 997.0 and cfg.material.gamma == row["gamma"], name
        assert_allclose(cfg.material.a_tilde, 3.041e4, err_msg=name)
        assert cfg.material.b_coeff == 3.0397e4, name
    assert_allclose(builtin("example1-baro").mesh.spacing, (0.0714, 0.0714), rtol=1e-3)
    ex1 = builtin("example1-baro")
    assert set(ex1.initial.nodes) == {(4, 0), (5, 1)}
    assert set(builtin("example3-baro").initial.nodes) == {(1, 0, 1), (1, 0, 2)}
    ex2 = builtin("example2-impact")
    assert [c.stiffness for c in ex2.constraints.contacts] == [4.8e10, 4.8e6]
    assert_allclose(ex2.mesh.spacing, (0.0625, 0.033), rtol=1.1e-2)
    ex4 = builtin("example4-impact")
    assert [c.stiffness for c in ex4.constraints.contacts] == [5e9, 5e9]
    assert_allclose(ex4.mesh.spacing, (0.1, 0.2, 0.1))


def test_study_protocols():
    t2 = study("conv2d-free", "time")
    assert t2.levels == (5e-3, 2.5e-3, 1.25e-3, 6.25e-4) and t2.reference == 3.125e-4 and t2.t_final == 0.25
    assert_allclose(t2.base.mesh.spacing[0], 0.057, rtol=3e-3)
    assert t2.base.initial.slope == (0.0, 0.163)
    s2 = study("conv2d-free", "space")
    assert s2.levels == (0.4, 0.2, 0.1, 0.05) and s2.reference == 0.025 and s2.t_final == 0.1
    t3 = study("conv3d-surface", "time")
    assert t3.levels == (2.5e-4, 1.25e-4, 6.25e-5, 3.125e-5)
    assert len(STUDIES) == 4
    with pytest.raises(KeyError):
        study("example1-baro", "time")
    with pytest.raises(KeyError):
        builtin("nope")


def test_scenario_validation():
    mesh = Mesh2D(2, 2, 0.5, 0.5)
    from mvfluid.scenarios import water

    with pytest.raises(ValueError):
        ScenarioConfig(mesh, water(), dt=1e-3, steps=10, integrator="rk4")
    with pytest.raises(ValueError):
        ScenarioConfig(mesh, water(), dt=0.0, steps=10)
