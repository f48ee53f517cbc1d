from dataclasses import replace

import numpy as np
import pytest

from topocut.model import (ConstraintSpec, DesignField, MaterialSet,
                           ProblemSpec, element_centroids, from_config,
                           initial_design, measure, node_index, parse_config,
                           preset, to_config, validate, PRESET_NAMES)


def test_node_index_column_major():
    # nodes run bottom-to-top, then column by column
    n_y = 3
    assert node_index(n_y, 0, 0) == 0
    assert node_index(n_y, 0, 3) == 3
    assert node_index(n_y, 1, 0) == 4
    assert node_index(n_y, 2, 1) == 9


def test_element_centroids():
    c = element_centroids(2, 3)
    assert c.shape == (6, 2)
    # element e = ex*n_y + ey
    np.testing.assert_allclose(c[0], [0.5, 0.5])
    np.testing.assert_allclose(c[2], [0.5, 2.5])
    np.testing.assert_allclose(c[3], [1.5, 0.5])


def test_design_field_shapes_and_occupancy():
    d = DesignField(np.array([1.0, 0.0, 1.0]))
    assert d.values.shape == (3, 1)
    assert d.n_elements == 3 and d.n_materials == 1
    np.testing.assert_array_equal(d.occupancy(), [1, 0, 1])

    m = DesignField(np.array([[1, 0], [0, 0], [0, 1]]), binary=True)
    np.testing.assert_array_equal(m.occupancy(), [1, 0, 1])
    np.testing.assert_array_equal(m.material_map(), [1, 0, 2])


def test_uniform_field_is_gray():
    d = DesignField.uniform(4, 2, 0.3)
    assert not d.binary
    assert d.values.shape == (4, 2)
    assert (d.values == 0.3).all()


def test_initial_design_matches_target():
    spec = preset("mbb", 6, 2)
    seed = initial_design(spec)
    assert seed.values.shape == (12, 1)
    assert (seed.values == 0.4).all()
    seed2 = initial_design(spec, 0.55)
    assert (seed2.values == 0.55).all()


def test_measure_volume():
    d = DesignField(np.array([1.0, 1.0, 0.0, 0.0]))
    out = measure(d, ConstraintSpec("volume", 0.5))
    assert out["value"] == 0.5
    assert out["feasible"]
    out = measure(d, ConstraintSpec("volume", 0.4))
    assert not out["feasible"]


def test_measure_mass_and_exclusivity():
    mats = MaterialSet((0.5, 1.0), (0.5, 1.0))
    d = DesignField(np.array([[1, 0], [0, 1], [0, 0], [0, 0]]), binary=True)
    out = measure(d, ConstraintSpec("mass", 0.4), mats)
    assert out["value"] == pytest.approx((0.5 + 1.0) / 4)
    assert out["feasible"]
    # double occupancy is never feasible under a mass constraint
    d2 = DesignField(np.array([[1, 1], [0, 0], [0, 0], [0, 0]]))
    out2 = measure(d2, ConstraintSpec("mass", 0.9), mats)
    assert not out2["feasible"]


def test_measure_rejects_channel_mismatch():
    mats = MaterialSet((0.5, 1.0), (0.5, 1.0))
    d = DesignField(np.ones(4))
    with pytest.raises(ValueError):
        measure(d, ConstraintSpec("mass", 0.5), mats)
    with pytest.raises(ValueError):
        measure(DesignField(np.ones((4, 2))), ConstraintSpec("volume", 0.5))


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_validate(name):
    assert validate(preset(name)) == []


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_validate_small(name):
    assert validate(preset(name, 12, 6)) == []


def test_preset_overrides():
    spec = preset("mbb", 12, 4, d0=0.25, max_iters=7)
    assert spec.n_x == 12 and spec.n_y == 4
    assert spec.d0 == 0.25
    assert spec.max_iters == 7
    with pytest.raises(KeyError):
        preset("nope")


def test_mbb_boundary_conditions():
    spec = preset("mbb", 4, 3)
    # symmetry plane: x-DOFs of the whole left edge
    left_x = {2 * node_index(3, 0, iy) for iy in range(4)}
    assert left_x <= set(spec.fixed_dofs)
    # roller under the bottom-right corner
    assert 2 * node_index(3, 4, 0) + 1 in spec.fixed_dofs
    assert len(spec.fixed_dofs) == 5
    # unit downward load on the top-left corner
    assert spec.loads == ((2 * node_index(3, 0, 3) + 1, -1.0),)


def test_cantilever_boundary_conditions():
    spec = preset("cantilever", 4, 2)
    for iy in range(3):
        node = node_index(2, 0, iy)
        assert 2 * node in spec.fixed_dofs
        assert 2 * node + 1 in spec.fixed_dofs
    assert spec.loads == ((2 * node_index(2, 4, 1) + 1, -1.0),)


def test_mechanism_ports():
    spec = preset("mechanism", 6, 4)
    assert spec.objective == "mechanism"
    dof_in = 2 * node_index(4, 0, 0)
    dof_out = 2 * node_index(4, 6, 0)
    assert spec.loads == ((dof_in, 1.0),)
    assert spec.output_dof == dof_out
    assert dict(spec.springs) == {dof_in: 0.1, dof_out: 0.1}
    # bottom edge is the symmetry line
    for ix in range(7):
        assert 2 * node_index(4, ix, 0) + 1 in spec.fixed_dofs
    assert spec.mirror_y


def test_validate_catches_bad_input():
    spec = preset("mbb", 6, 2)
    bad = replace(spec, constraint=ConstraintSpec("volume", 1.5))
    assert any("target" in v for v in validate(bad))
    bad = replace(spec, filter_radius=0.5)
    assert any("filter radius" in v for v in validate(bad))
    bad = replace(spec, loads=((spec.fixed_dofs[0], -1.0),))
    assert any("fixed DOF" in v for v in validate(bad))
    bad = replace(spec, scheme="scheme-2")
    assert validate(bad)  # missing ramp parameters
    bad = replace(spec, d_min=0.5, d_max=0.2)
    assert any("d_min" in v for v in validate(bad))


def test_materials_validate():
    assert MaterialSet((1.0,), (1.0,), 1e-9).violations() == []
    assert MaterialSet((1.0, 0.5), (1.0,)).violations()
    assert MaterialSet((1e-12,), (1.0,), 1e-9).violations()
    assert MaterialSet((1.0,), (1.0,), 0.0).violations()


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_config_round_trip(name):
    spec = preset(name, 24, 12)
    text = to_config(spec)
    back = from_config(parse_config(text))
    assert back == spec


def test_parse_config_comments_and_errors():
    cfg = parse_config("a = 1\n# comment\n\nb = two # trailing\n")
    assert cfg == {"a": "1", "b": "two"}
    with pytest.raises(ValueError):
        parse_config("not a pair\n")
