import json

import pytest

from conftest import chain_bundle, mesh_point_bundle, router_bundle
from icikit import netgen
from icikit.model import (ParseError, Trace, TraceMessage, load_design,
                          read_json, save_design, write_json)
from icikit.validate import validate


def test_save_load_round_trip(tmp_path):
    bundle = chain_bundle(3)
    bundle.trace = Trace([TraceMessage(0, 0, 0, 1, 1, []),
                          TraceMessage(1, 2, 1, 2, 3, [0])])
    design_path = save_design(bundle, tmp_path)
    loaded = load_design(design_path)
    assert loaded == bundle
    # serialize(load(p)) parses back to an equal bundle again
    second = save_design(loaded, tmp_path / "again")
    assert load_design(second) == loaded


def test_design_file_missing_input(tmp_path):
    design_path = save_design(chain_bundle(2), tmp_path)
    doc = read_json(design_path)
    doc["topology"] = "missing_topology.json"
    write_json(design_path, doc)
    with pytest.raises(ParseError) as err:
        load_design(design_path)
    assert "missing_topology.json" in str(err.value)


def test_duplicate_chiplet_name_rejected(tmp_path):
    design_path = save_design(chain_bundle(2), tmp_path)
    chiplets_path = tmp_path / "design_chiplets.json"
    doc = json.loads(chiplets_path.read_text())
    body = json.dumps(doc["chiplets"]["core"])
    chiplets_path.write_text('{"chiplets": {"core": %s, "core": %s}}' % (body, body))
    with pytest.raises(ParseError) as err:
        load_design(design_path)
    assert "duplicate key 'core'" in str(err.value)


def test_unknown_field_rejected(tmp_path):
    design_path = save_design(chain_bundle(2), tmp_path)
    packaging_path = tmp_path / "design_packaging.json"
    doc = json.loads(packaging_path.read_text())
    doc["link_colour"] = "red"
    packaging_path.write_text(json.dumps(doc))
    with pytest.raises(ParseError) as err:
        load_design(design_path)
    assert "link_colour" in str(err.value)


def test_missing_required_kind(tmp_path):
    design_path = save_design(chain_bundle(2), tmp_path)
    doc = read_json(design_path)
    del doc["traffic"]
    write_json(design_path, doc)
    with pytest.raises(ParseError) as err:
        load_design(design_path)
    assert "traffic" in str(err.value)


def test_bad_rotation_is_parse_error(tmp_path):
    design_path = save_design(chain_bundle(2), tmp_path)
    placement_path = tmp_path / "design_placement.json"
    doc = json.loads(placement_path.read_text())
    doc["chiplets"][0]["rotation"] = 45
    placement_path.write_text(json.dumps(doc))
    with pytest.raises(ParseError):
        load_design(design_path)


def test_validate_unknown_chiplet_name():
    bundle = chain_bundle(2)
    bundle.placement.chiplets[1].name = "cpu9"
    report = validate(bundle)
    assert len(report) == 1
    assert report[0].kind == "placement"
    assert report[0].index == 1
    assert "cpu9" in report[0].message


def test_validate_routing_destination_out_of_range():
    bundle = chain_bundle(3)
    bundle.routing_table.tables[0][99] = 0
    report = validate(bundle)
    assert any(v.kind == "routing_table" and "99" in v.message for v in report)


def test_validate_is_pure():
    bundle = chain_bundle(3)
    bundle.routing_table.tables[0][99] = 0
    first = validate(bundle)
    second = validate(bundle)
    assert [str(v) for v in first] == [str(v) for v in second]


def test_validate_overlap():
    bundle = chain_bundle(2)
    bundle.placement.chiplets[1].x_mm = 5.0  # 10 mm wide chiplets at 0 and 5
    report = validate(bundle)
    assert any(v.kind == "placement" and "overlap" in v.message for v in report)


def test_touching_edges_are_legal():
    bundle = chain_bundle(2)
    bundle.placement.chiplets[1].x_mm = 10.0  # abutting exactly
    assert not any(v.kind == "placement" for v in validate(bundle))


def test_validate_phy_fraction_sum():
    bundle = chain_bundle(2)
    for phy in bundle.chiplets["core"].phys:
        phy.area_fraction = 0.7
    report = validate(bundle)
    assert any("fractions sum" in v.message for v in report)


def test_validate_phy_shared_by_two_links():
    bundle = chain_bundle(3)
    bundle.topology.links[1].ep1 = bundle.topology.links[0].ep1
    report = validate(bundle)
    assert any("already" in v.message for v in report)


def test_validate_trace_cycle():
    bundle = chain_bundle(2)
    bundle.trace = Trace([TraceMessage(0, 0, 0, 1, 1, [1]),
                          TraceMessage(1, 0, 0, 1, 1, [0])])
    report = validate(bundle)
    assert any(v.kind == "trace" and "cycle" in v.message for v in report)


def test_validate_routing_loop():
    bundle = chain_bundle(3)
    bundle.routing_table.tables[1][2] = 0  # bounce back to chiplet 0
    report = validate(bundle)
    assert any("terminate" in v.message for v in report)


def test_router_bundle_validates():
    assert validate(router_bundle()) == []


def test_generated_bundles_validate_empty():
    kinds = ["mesh", "torus", "folded_torus", "flattened_butterfly", "hexamesh"]
    sizes = [(2, 2), (3, 3), (5, 4), (8, 8)]
    for kind in kinds:
        for rows, cols in sizes:
            bundle = mesh_point_bundle(rows, cols, kind=kind)
            assert validate(bundle) == [], f"{kind} {rows}x{cols}"
    for rows, cols in [(2, 2), (4, 4), (4, 8)]:
        assert validate(mesh_point_bundle(rows, cols, kind="hypercube")) == []
    shg = mesh_point_bundle(4, 4, kind="shg")  # defaults to the all-ones bits
    assert validate(shg) == []


def test_generated_turn_random_bundles_validate_empty():
    for kind in ["mesh", "torus", "flattened_butterfly"]:
        bundle = mesh_point_bundle(5, 5, kind=kind, routing="turn_random", seed=3)
        assert validate(bundle) == [], kind
