"""Shared design builders for the test suite."""

import pytest

from icikit.model import (ChipletDef, DesignBundle, Endpoint, InterposerRouter,
                          Link, LinkLatency, Packaging, PhyDef, PlacedChiplet,
                          Placement, RoutingTable, TechNode, Topology, Traffic,
                          TrafficEntry)

REFERENCE_TECH = {"n7": TechNode("n7", 300.0, 6400.0, 0.001, 5.0)}


def default_packaging(**overrides):
    base = dict(has_active_interposer=False, link_routing="manhattan",
                link_latency=LinkLatency("per_mm", 0.25),
                router_latency_cycles=0.0, link_power_per_mm_w=0.0,
                interposer_power_w=0.0, packaging_cost=20.0, non_data_wires=2)
    base.update(overrides)
    return Packaging(**base)


def chain_chiplet(name="core"):
    """10x10 mm chiplet with the reference latencies (internal 3, PHY 12)
    and an east/west PHY pair at mid-height."""
    phys = [PhyDef(0.0, 5.0, 0.25), PhyDef(10.0, 5.0, 0.25)]
    return ChipletDef(name, 10.0, 10.0, 3.0, 12.0, 5.0, 0.04, phys, "compute")


def chain_routing_tables(k):
    tables = []
    for i in range(k):
        table = {}
        for d in range(k):
            if d != i:
                table[d] = i if d > i else i - 1
        tables.append(table)
    return tables


def chain_bundle(k, traffic=None, trace=None, **packaging_overrides):
    """k chiplets in a row, 18 mm apart, so every PHY-to-PHY link is exactly
    8 mm (2 cycles at 0.25 cycles/mm); edge weight 12+2+12 = 26."""
    chiplet = chain_chiplet()
    placement = Placement([PlacedChiplet("core", 18.0 * i, 0.0, 0)
                           for i in range(k)], [])
    links = [Link(Endpoint("chiplet", i, 1), Endpoint("chiplet", i + 1, 0))
             for i in range(k - 1)]
    if traffic is None:
        traffic = Traffic([TrafficEntry(0, k - 1, 1.0)])
    return DesignBundle(chiplets={"core": chiplet},
                        placement=placement,
                        topology=Topology(links),
                        packaging=default_packaging(**packaging_overrides),
                        routing_table=RoutingTable(chain_routing_tables(k)),
                        traffic=traffic,
                        tech_nodes=dict(REFERENCE_TECH),
                        tech_assignment={"core": "n7"},
                        trace=trace)


def router_bundle():
    """Two chiplets joined through one interposer router (active interposer,
    router latency 5); each chiplet-router link is 8 mm: edge weight 12+2."""
    chiplet = chain_chiplet()
    placement = Placement(
        [PlacedChiplet("core", 0.0, 0.0, 0), PlacedChiplet("core", 26.0, 0.0, 0)],
        [InterposerRouter(18.0, 5.0)])
    links = [Link(Endpoint("chiplet", 0, 1), Endpoint("interposer_router", 0)),
             Link(Endpoint("interposer_router", 0), Endpoint("chiplet", 1, 0))]
    tables = [{1: 0}, {0: 1}, {0: 0, 1: 1}]
    return DesignBundle(chiplets={"core": chiplet},
                        placement=placement,
                        topology=Topology(links),
                        packaging=default_packaging(has_active_interposer=True,
                                                    router_latency_cycles=5.0),
                        routing_table=RoutingTable(tables),
                        traffic=Traffic([TrafficEntry(0, 1, 1.0)]),
                        tech_nodes=dict(REFERENCE_TECH),
                        tech_assignment={"core": "n7"})


def mesh_point_bundle(rows, cols, kind="mesh", pattern="uniform",
                      routing="lowest_id", seed=0, **experiment_overrides):
    """A generated design point with the reference chiplet parameters."""
    from icikit import dse

    exp = dse.Experiment(topologies=[kind], grid_sizes=[(rows, cols)],
                         traffic_patterns=[pattern],
                         routing_algorithms=[routing], seeds=[seed],
                         **experiment_overrides)
    point = dse.expand_points(exp)[0]
    return dse.materialize_point(exp, point)


@pytest.fixture
def two_chain():
    return chain_bundle(2)


@pytest.fixture
def three_chain():
    return chain_bundle(3)
