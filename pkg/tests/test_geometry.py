import math
import random

import pytest

from icikit import geometry
from icikit.model import ChipletDef, IcikitError, PhyDef, PlacedChiplet, Placement


def make_chiplet(w, h, phys):
    return ChipletDef("c", w, h, 3.0, 12.0, 1.0, 0.04,
                      [PhyDef(x, y, 0.25) for x, y in phys])


def test_phy_position_identity():
    chiplet = make_chiplet(4.0, 2.0, [(1.0, 2.0)])
    inst = PlacedChiplet("c", 10.0, 20.0, 0)
    assert geometry.phy_position(chiplet, inst, 0) == (11.0, 22.0)


def test_phy_position_rot90():
    # (x, y) on a w x h footprint maps to (h - y, x); 4x2 at origin, PHY (4,0).
    chiplet = make_chiplet(4.0, 2.0, [(4.0, 0.0)])
    inst = PlacedChiplet("c", 0.0, 0.0, 90)
    assert geometry.phy_position(chiplet, inst, 0) == (2.0, 4.0)


def test_phy_position_rot180():
    chiplet = make_chiplet(4.0, 2.0, [(0.0, 0.0)])
    inst = PlacedChiplet("c", 0.0, 0.0, 180)
    assert geometry.phy_position(chiplet, inst, 0) == (4.0, 2.0)


def test_phy_position_bad_index():
    chiplet = make_chiplet(4.0, 2.0, [(0.0, 0.0)])
    inst = PlacedChiplet("c", 0.0, 0.0, 0)
    with pytest.raises(IcikitError):
        geometry.phy_position(chiplet, inst, 1)


def test_four_quarter_turns_return_home():
    rng = random.Random(3)
    for _ in range(50):
        w, h = rng.uniform(1, 9), rng.uniform(1, 9)
        x, y = rng.uniform(0, w), rng.uniform(0, h)
        px, py = x, y
        for _ in range(4):
            px, py = geometry.rotate_point(px, py, w, h, 90)
            w, h = h, w
        assert math.isclose(px, x, abs_tol=1e-9)
        assert math.isclose(py, y, abs_tol=1e-9)


def test_link_length_basics():
    assert geometry.link_length((1.0, 1.0), (1.0, 1.0), "manhattan") == 0.0
    assert geometry.link_length((1.0, 1.0), (1.0, 1.0), "direct") == 0.0
    assert geometry.link_length((0.0, 0.0), (3.0, 4.0), "manhattan") == 7.0
    assert geometry.link_length((0.0, 0.0), (3.0, 4.0), "direct") == 5.0


def test_direct_never_exceeds_manhattan():
    rng = random.Random(11)
    for _ in range(200):
        a = (rng.uniform(-50, 50), rng.uniform(-50, 50))
        b = (rng.uniform(-50, 50), rng.uniform(-50, 50))
        assert (geometry.link_length(a, b, "direct")
                <= geometry.link_length(a, b, "manhattan") + 1e-12)


def test_unknown_rule():
    with pytest.raises(IcikitError):
        geometry.link_length((0, 0), (1, 1), "diagonal")


def test_enclosing_rectangle_cases():
    lib = {"c": make_chiplet(4.0, 2.0, [])}
    single = Placement([PlacedChiplet("c", 0.0, 0.0, 0)], [])
    assert geometry.enclosing_rectangle(single, lib) == (4.0, 2.0)
    rotated = Placement([PlacedChiplet("c", 0.0, 0.0, 90)], [])
    assert geometry.enclosing_rectangle(rotated, lib) == (2.0, 4.0)
    lib1 = {"u": make_chiplet(1.0, 1.0, [])}
    two = Placement([PlacedChiplet("u", 0.0, 0.0, 0),
                     PlacedChiplet("u", 5.0, 3.0, 0)], [])
    assert geometry.enclosing_rectangle(two, lib1) == (6.0, 4.0)


def test_enclosing_rectangle_translation_covariant():
    rng = random.Random(5)
    lib = {"c": make_chiplet(3.0, 7.0, [])}
    instances = [PlacedChiplet("c", rng.uniform(0, 40), rng.uniform(0, 40),
                               rng.choice([0, 90, 180, 270])) for _ in range(6)]
    base = geometry.enclosing_rectangle(Placement(instances, []), lib)
    dx, dy = rng.uniform(-20, 20), rng.uniform(-20, 20)
    moved = [PlacedChiplet("c", i.x_mm + dx, i.y_mm + dy, i.rotation)
             for i in instances]
    shifted = geometry.enclosing_rectangle(Placement(moved, []), lib)
    assert math.isclose(base[0], shifted[0], abs_tol=1e-9)
    assert math.isclose(base[1], shifted[1], abs_tol=1e-9)


def test_empty_placement_rejected():
    with pytest.raises(IcikitError):
        geometry.enclosing_rectangle(Placement([], []), {})
