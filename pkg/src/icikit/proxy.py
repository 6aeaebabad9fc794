"""Weighted ICI graph construction and the analytical latency and throughput
proxies.

The interconnect is an undirected weighted graph: one vertex per chiplet
instance and interposer router (weight = internal/router latency in cycles),
one edge per link (weight = link latency plus the PHY latency of every chiplet
endpoint).  Average latency weights each traffic entry's full path sum
(all vertex and edge weights along the route) by its traffic amount.  The
throughput proxy scales total traffic by the worst edge's bandwidth-to-flow
ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import geometry
from .model import DesignBundle, IcikitError, RoutingTable, RoutingError, Traffic


@dataclass(slots=True)
class IciEdge:
    index: int
    u: int
    v: int
    length_mm: float
    link_cycles: float   # link-latency part of the weight
    phy_cycles: float    # summed PHY latencies of chiplet endpoints
    bandwidth: float     # wire count; inf for router-to-router links

    @property
    def weight(self) -> float:
        return self.link_cycles + self.phy_cycles

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u


@dataclass(slots=True)
class IciGraph:
    n_chiplets: int
    n_nodes: int
    vertex_weights: list[float]
    edges: list[IciEdge]
    adjacency: list[list[tuple[int, int]]]  # per node: sorted (neighbor, edge index)


@dataclass(slots=True)
class PerfReport:
    avg_latency_cycles: float
    throughput_units: float
    bottleneck_edge: int
    area: dict | None = None
    power: dict | None = None
    cost: dict | None = None
    edge_table: list[dict] | None = None

    def to_json(self) -> dict:
        out = {"avg_latency_cycles": self.avg_latency_cycles,
               "throughput_units": self.throughput_units,
               "bottleneck_edge": self.bottleneck_edge}
        if self.area is not None:
            out["area"] = self.area
        if self.power is not None:
            out["power"] = self.power
        if self.cost is not None:
            out["cost"] = self.cost
        if self.edge_table is not None:
            out["edges"] = self.edge_table
        return out


def edge_bandwidth(area_mm2: float, fraction: float, pitch_mm: float,
                   non_data_wires: int) -> int:
    """Wires available to one chiplet endpoint of a link: the PHY's bump count
    minus the non-data wires.  A non-positive result means the link cannot
    carry data and is an error."""
    if pitch_mm <= 0:
        raise IcikitError("bump pitch must be > 0")
    if not 0 < fraction <= 1:
        raise IcikitError("PHY area fraction must be in (0, 1]")
    wires = math.floor(area_mm2 * fraction / (pitch_mm * pitch_mm)) - non_data_wires
    if wires <= 0:
        raise IcikitError(
            f"link has no data wires: floor({area_mm2:.6g} * {fraction:.6g} / "
            f"{pitch_mm:.6g}^2) - {non_data_wires} = {wires}")
    return wires


def build_ici_graph(bundle: DesignBundle) -> IciGraph:
    """Resolve vertex weights, edge weights, lengths, and bandwidths."""
    packaging = bundle.packaging
    n_chiplets = bundle.n_chiplets
    n_nodes = bundle.n_nodes
    weights = [bundle.chiplet_at(i).internal_latency_cycles for i in range(n_chiplets)]
    weights += [packaging.router_latency_cycles] * (n_nodes - n_chiplets)

    edges = []
    adjacency = [[] for _ in range(n_nodes)]
    for li, link in enumerate(bundle.topology.links):
        pos = []
        nodes = []
        phy_cycles = 0.0
        bandwidth = math.inf
        for ep in (link.ep1, link.ep2):
            pos.append(geometry.endpoint_position(bundle, ep))
            if ep.kind == "chiplet":
                nodes.append(ep.index)
                chiplet = bundle.chiplet_at(ep.index)
                phy_cycles += chiplet.phy_latency_cycles
                try:
                    wires = edge_bandwidth(chiplet.area_mm2,
                                           chiplet.phys[ep.phy].area_fraction,
                                           chiplet.bump_pitch_mm,
                                           packaging.non_data_wires)
                except IcikitError as exc:
                    raise IcikitError(f"link {li}: {exc}") from exc
                bandwidth = min(bandwidth, wires)
            else:
                nodes.append(n_chiplets + ep.index)
        length = geometry.link_length(pos[0], pos[1], packaging.link_routing)
        edge = IciEdge(index=li, u=nodes[0], v=nodes[1], length_mm=length,
                       link_cycles=packaging.link_latency.cycles(length),
                       phy_cycles=phy_cycles, bandwidth=bandwidth)
        edges.append(edge)
        adjacency[edge.u].append((edge.v, li))
        adjacency[edge.v].append((edge.u, li))
    for lst in adjacency:
        lst.sort()
    return IciGraph(n_chiplets, n_nodes, weights, edges, adjacency)


def route(graph: IciGraph, routing_table: RoutingTable, src: int,
          dst: int) -> tuple[list[int], list[int]]:
    """Follow next-hop entries from src to dst; returns (vertex sequence
    including both ends, edge sequence)."""
    if src == dst:
        raise RoutingError("source equals destination")
    vertices = [src]
    hops = []
    node = src
    for _ in range(graph.n_nodes):
        entry = routing_table.tables[node].get(dst)
        if entry is None:
            raise RoutingError(f"node {node} has no entry for destination {dst}")
        node = graph.edges[entry].other(node)
        vertices.append(node)
        hops.append(entry)
        if node == dst:
            return vertices, hops
    raise RoutingError(f"routing loop: {src} -> {dst} exceeds {graph.n_nodes} hops")


def _traffic_by_destination(traffic: Traffic) -> dict[int, dict[int, float]]:
    grouped: dict[int, dict[int, float]] = {}
    for e in traffic.entries:
        if e.amount == 0:
            continue
        grouped.setdefault(e.dst, {})[e.src] = grouped.get(e.dst, {}).get(e.src, 0.0) + e.amount
    return grouped


def _destination_tree(graph, tables, dst, sources):
    """Next-hop tree toward dst covering every traffic source: returns
    (next_edge, depth, order) maps over the visited nodes."""
    next_edge: dict[int, int] = {}
    depth: dict[int, int] = {dst: 0}
    n_nodes = graph.n_nodes
    edges = graph.edges
    for start in sources:
        if start in depth:
            continue
        path = []
        node = start
        while node not in depth:
            entry = tables[node].get(dst)
            if entry is None:
                raise RoutingError(f"node {node} has no entry for destination {dst}")
            path.append((node, entry))
            node = edges[entry].other(node)
            if len(path) > n_nodes:
                raise RoutingError(
                    f"routing loop while resolving {start} -> {dst}")
        base = depth[node]
        for back, (vnode, ventry) in enumerate(reversed(path)):
            next_edge[vnode] = ventry
            depth[vnode] = base + back + 1
    order = sorted(next_edge, key=lambda n: -depth[n])
    return next_edge, order


def evaluate_proxies(graph: IciGraph, routing_table: RoutingTable,
                     traffic: Traffic):
    """Compute average latency, per-edge flows, throughput, and the bottleneck
    edge in one pass.

    Work is organized per destination: the routing table induces an in-tree,
    so path sums and flow accumulation both run in one sweep over the tree
    instead of one walk per traffic entry."""
    tables = routing_table.tables
    edges = graph.edges
    weights = graph.vertex_weights
    flows = [0.0] * len(edges)
    lat_weighted = 0.0
    total = 0.0
    for dst, amounts in _traffic_by_destination(traffic).items():
        next_edge, order = _destination_tree(graph, tables, dst, amounts)
        # Path sums from the tree root outward (increasing depth).
        pathlat = {dst: weights[dst]}
        for node in reversed(order):
            e = edges[next_edge[node]]
            pathlat[node] = pathlat[e.other(node)] + e.weight + weights[node]
        # Flow accumulation from the leaves inward (decreasing depth).
        carry: dict[int, float] = {}
        for node in order:
            amount = amounts.get(node, 0.0) + carry.get(node, 0.0)
            if amount == 0.0:
                continue
            e = next_edge[node]
            flows[e] += amount
            nxt = edges[e].other(node)
            carry[nxt] = carry.get(nxt, 0.0) + amount
        for src, amount in amounts.items():
            lat_weighted += amount * pathlat[src]
            total += amount
    if total <= 0:
        raise IcikitError("total traffic is zero")
    avg_latency = lat_weighted / total

    bottleneck = -1
    worst = math.inf
    for e in edges:
        f = flows[e.index]
        if f > 0:
            ratio = e.bandwidth / f
            if ratio < worst:
                worst = ratio
                bottleneck = e.index
    if bottleneck < 0:
        raise IcikitError("no edge carries traffic; throughput is undefined")
    throughput = worst * total
    return avg_latency, flows, throughput, bottleneck


def latency_proxy(graph: IciGraph, routing_table: RoutingTable,
                  traffic: Traffic) -> float:
    """Traffic-weighted average of per-path latency (all vertex weights on the
    route, intermediates included, plus all edge weights)."""
    avg_latency, _, _, _ = evaluate_proxies(graph, routing_table, traffic)
    return avg_latency


def edge_flows(graph: IciGraph, routing_table: RoutingTable,
               traffic: Traffic) -> list[float]:
    """Per-edge traffic sums; direction is ignored (undirected aggregation)."""
    tables = routing_table.tables
    edges = graph.edges
    flows = [0.0] * len(edges)
    for dst, amounts in _traffic_by_destination(traffic).items():
        next_edge, order = _destination_tree(graph, tables, dst, amounts)
        carry: dict[int, float] = {}
        for node in order:
            amount = amounts.get(node, 0.0) + carry.get(node, 0.0)
            if amount == 0.0:
                continue
            e = next_edge[node]
            flows[e] += amount
            nxt = edges[e].other(node)
            carry[nxt] = carry.get(nxt, 0.0) + amount
    return flows


def throughput_proxy(graph: IciGraph, routing_table: RoutingTable,
                     traffic: Traffic) -> tuple[float, int]:
    """Total traffic scaled by the minimum bandwidth/flow ratio over edges
    that carry flow; returns (throughput, bottleneck edge index)."""
    _, _, throughput, bottleneck = evaluate_proxies(graph, routing_table, traffic)
    return throughput, bottleneck


def normalized_throughput_rate(graph: IciGraph, throughput_units: float,
                               bottleneck_edge: int) -> float:
    """Convert proxy throughput (traffic units) to a flits/node/cycle
    injection-rate equivalent.

    Under the one-wire-one-unit convention a link moves its wire count in
    units per cycle while the flit simulator moves one flit per link per
    cycle, so the unit throughput is divided by the bottleneck link's wire
    count and spread over the nodes."""
    bandwidth = graph.edges[bottleneck_edge].bandwidth
    if not math.isfinite(bandwidth) or bandwidth <= 0:
        raise IcikitError("bottleneck edge has no finite bandwidth")
    return throughput_units / (graph.n_chiplets * bandwidth)
