import math
import random

import pytest

import oracles
from conftest import chain_bundle, mesh_point_bundle, router_bundle
from icikit import netgen, proxy
from icikit.model import (IcikitError, RoutingError, RoutingTable, Traffic,
                          TrafficEntry)


def test_two_chiplet_edge_weights(two_chain):
    graph = proxy.build_ici_graph(two_chain)
    assert graph.vertex_weights == [3.0, 3.0]
    assert graph.edges[0].weight == 26.0  # 12 + 0.25*8 + 12
    assert graph.edges[0].length_mm == 8.0


def test_router_edge_weights():
    graph = proxy.build_ici_graph(router_bundle())
    assert graph.vertex_weights == [3.0, 3.0, 5.0]
    # one PHY endpoint per chiplet-router link: 12 + 0.25*8
    assert graph.edges[0].weight == 14.0
    assert graph.edges[1].weight == 14.0
    assert graph.edges[0].bandwidth != math.inf


def test_per_mm_matches_constant(two_chain):
    constant = chain_bundle(2)
    constant.packaging.link_latency.type = "constant"
    constant.packaging.link_latency.value = 2.0
    g_per_mm = proxy.build_ici_graph(two_chain)
    g_const = proxy.build_ici_graph(constant)
    assert g_per_mm.edges[0].weight == g_const.edges[0].weight == 26.0


def test_edge_bandwidth_reference_values():
    assert proxy.edge_bandwidth(74.0, 0.25, 0.04, 2) == 11560  # 11562 - 2
    assert proxy.edge_bandwidth(1.0, 1.0, 1.0, 0) == 1
    with pytest.raises(IcikitError):
        proxy.edge_bandwidth(1.0, 0.5, 1.0, 1)  # floor(0.5) - 1 = -1


def test_zero_wire_link_rejected():
    bundle = chain_bundle(2)
    bundle.packaging.non_data_wires = 10 ** 9
    with pytest.raises(IcikitError) as err:
        proxy.build_ici_graph(bundle)
    assert "no data wires" in str(err.value)


def test_route_adjacent(two_chain):
    graph = proxy.build_ici_graph(two_chain)
    vertices, hops = proxy.route(graph, two_chain.routing_table, 0, 1)
    assert vertices == [0, 1]
    assert hops == [0]


def test_route_on_mesh_lowest_id():
    bundle = mesh_point_bundle(3, 3)
    graph = proxy.build_ici_graph(bundle)
    vertices, hops = proxy.route(graph, bundle.routing_table, 0, 8)
    assert len(hops) == 4
    assert vertices[1] == 1  # lowest-id shortest-path neighbor of the corner


def test_route_loop_detected():
    bundle = chain_bundle(3)
    bundle.routing_table.tables[1][2] = 0  # 0 <-> 1 ping-pong
    graph = proxy.build_ici_graph(bundle)
    with pytest.raises(RoutingError):
        proxy.route(graph, bundle.routing_table, 0, 2)


def test_route_missing_entry(two_chain):
    del two_chain.routing_table.tables[0][1]
    graph = proxy.build_ici_graph(two_chain)
    with pytest.raises(RoutingError):
        proxy.route(graph, two_chain.routing_table, 0, 1)


def test_latency_two_chiplets(two_chain):
    graph = proxy.build_ici_graph(two_chain)
    assert proxy.latency_proxy(graph, two_chain.routing_table, two_chain.traffic) == 32.0


def test_latency_three_chain_counts_intermediate(three_chain):
    graph = proxy.build_ici_graph(three_chain)
    assert proxy.latency_proxy(graph, three_chain.routing_table,
                               three_chain.traffic) == 61.0


def test_latency_weighted_mean():
    bundle = chain_bundle(3, traffic=Traffic([TrafficEntry(0, 1, 1.0),
                                              TrafficEntry(0, 2, 3.0)]))
    graph = proxy.build_ici_graph(bundle)
    # (1*32 + 3*61) / 4
    assert proxy.latency_proxy(graph, bundle.routing_table, bundle.traffic) == 53.75


def test_edge_flows_chain():
    bundle = chain_bundle(3)
    graph = proxy.build_ici_graph(bundle)
    assert proxy.edge_flows(graph, bundle.routing_table, bundle.traffic) == [1.0, 1.0]
    bundle.traffic.entries.append(TrafficEntry(0, 1, 0.5))
    assert proxy.edge_flows(graph, bundle.routing_table, bundle.traffic) == [1.5, 1.0]


def test_edge_flows_unused_edge_zero():
    bundle = chain_bundle(3, traffic=Traffic([TrafficEntry(0, 1, 1.0)]))
    graph = proxy.build_ici_graph(bundle)
    assert proxy.edge_flows(graph, bundle.routing_table, bundle.traffic) == [1.0, 0.0]


def _with_bandwidth(bundle, wires):
    graph = proxy.build_ici_graph(bundle)
    for edge in graph.edges:
        edge.bandwidth = wires
    return graph


def test_throughput_chain():
    bundle = chain_bundle(3)
    graph = _with_bandwidth(bundle, 100)
    throughput, bottleneck = proxy.throughput_proxy(graph, bundle.routing_table,
                                                    bundle.traffic)
    assert throughput == 100.0  # min(B/F) * total = (100/1) * 1
    bundle.traffic.entries.append(TrafficEntry(0, 1, 0.5))
    throughput, bottleneck = proxy.throughput_proxy(graph, bundle.routing_table,
                                                    bundle.traffic)
    assert throughput == pytest.approx((100 / 1.5) * 1.5)
    assert bottleneck == 0


def test_throughput_scale_invariance():
    bundle = mesh_point_bundle(3, 3)
    graph = proxy.build_ici_graph(bundle)
    base_lat = proxy.latency_proxy(graph, bundle.routing_table, bundle.traffic)
    base_thr, base_edge = proxy.throughput_proxy(graph, bundle.routing_table,
                                                 bundle.traffic)
    for scale in (0.25, 10.0, 1000.0):
        scaled = Traffic([TrafficEntry(e.src, e.dst, e.amount * scale)
                          for e in bundle.traffic.entries])
        assert proxy.latency_proxy(graph, bundle.routing_table, scaled) == \
            pytest.approx(base_lat)
        thr, edge = proxy.throughput_proxy(graph, bundle.routing_table, scaled)
        assert thr == pytest.approx(base_thr)
        assert edge == base_edge


def test_throughput_needs_flow():
    bundle = chain_bundle(2, traffic=Traffic([]))
    graph = proxy.build_ici_graph(bundle)
    with pytest.raises(IcikitError):
        proxy.throughput_proxy(graph, bundle.routing_table, bundle.traffic)


def test_monotonicity_bandwidth_and_weights():
    bundle = mesh_point_bundle(3, 3)
    graph = proxy.build_ici_graph(bundle)
    base_thr, bottleneck = proxy.throughput_proxy(graph, bundle.routing_table,
                                                  bundle.traffic)
    graph.edges[bottleneck].bandwidth *= 2
    raised, _ = proxy.throughput_proxy(graph, bundle.routing_table, bundle.traffic)
    assert raised >= base_thr - 1e-12
    base_lat = proxy.latency_proxy(graph, bundle.routing_table, bundle.traffic)
    graph.vertex_weights[4] += 5.0
    assert proxy.latency_proxy(graph, bundle.routing_table,
                               bundle.traffic) >= base_lat
    graph.edges[0].link_cycles += 3.0
    assert proxy.latency_proxy(graph, bundle.routing_table,
                               bundle.traffic) >= base_lat


def small_design_corpus():
    yield chain_bundle(2)
    yield chain_bundle(3)
    yield chain_bundle(3, traffic=Traffic([TrafficEntry(0, 2, 0.25),
                                           TrafficEntry(2, 0, 1.5),
                                           TrafficEntry(0, 1, 0.5)]))
    yield router_bundle()
    yield mesh_point_bundle(2, 2)
    yield mesh_point_bundle(3, 3)
    yield mesh_point_bundle(3, 4)
    yield mesh_point_bundle(2, 3, kind="torus")
    yield mesh_point_bundle(3, 4, kind="folded_torus", pattern="permutation")
    yield mesh_point_bundle(3, 3, kind="flattened_butterfly", pattern="transpose")
    yield mesh_point_bundle(3, 4, kind="hexamesh", routing="turn_random", seed=2)


def test_brute_force_equivalence_small_designs():
    # Designs stay at <= 12 nodes; the naive per-entry oracle must agree
    # exactly (all quantities are dyadic rationals, so no float slack).
    for bundle in small_design_corpus():
        assert bundle.n_nodes <= 12
        graph = proxy.build_ici_graph(bundle)
        fast_latency = proxy.latency_proxy(graph, bundle.routing_table,
                                           bundle.traffic)
        fast_flows = proxy.edge_flows(graph, bundle.routing_table, bundle.traffic)
        assert fast_latency == oracles.naive_latency(bundle)
        assert fast_flows == oracles.naive_flows(bundle)


def test_torus_orbit_flows_equal():
    # Uniform traffic on a 4x4 torus with a translation-invariant
    # dimension-order table: every row edge carries the same flow, and every
    # column edge carries the same flow.
    bundle = mesh_point_bundle(4, 4, kind="torus")
    graph = proxy.build_ici_graph(bundle)
    rows = cols = 4

    def steps(delta, size):
        delta %= size
        return delta if delta <= size - delta else delta - size  # +: up/right

    edge_ix = {}
    for e in graph.edges:
        edge_ix[(min(e.u, e.v), max(e.u, e.v))] = e.index
    tables = [dict() for _ in range(16)]
    for src in range(16):
        for dst in range(16):
            if src == dst:
                continue
            sr, sc = divmod(src, cols)
            dr, dc = divmod(dst, cols)
            dx = steps(dc - sc, cols)
            dy = steps(dr - sr, rows)
            if dx != 0:
                nxt = sr * cols + (sc + (1 if dx > 0 else -1)) % cols
            else:
                nxt = ((sr + (1 if dy > 0 else -1)) % rows) * cols + sc
            tables[src][dst] = edge_ix[(min(src, nxt), max(src, nxt))]
    table = RoutingTable(tables)
    flows = proxy.edge_flows(graph, table, bundle.traffic)
    horizontal = [flows[e.index] for e in graph.edges
                  if abs(e.u - e.v) in (1, cols - 1) and e.u // cols == e.v // cols]
    vertical = [flows[e.index] for e in graph.edges
                if abs(e.u - e.v) in (cols, cols * (rows - 1))]
    assert len(horizontal) == 16 and len(vertical) == 16
    assert max(horizontal) == pytest.approx(min(horizontal))
    assert max(vertical) == pytest.approx(min(vertical))


def test_normalized_rate_uses_bottleneck_wires():
    bundle = chain_bundle(3)
    graph = _with_bandwidth(bundle, 200)
    throughput, bottleneck = proxy.throughput_proxy(graph, bundle.routing_table,
                                                    bundle.traffic)
    rate = proxy.normalized_throughput_rate(graph, throughput, bottleneck)
    # T = 200 units; over 3 nodes and 200 wires -> 1/3 flit/node/cycle
    assert rate == pytest.approx(1 / 3)
