"""Independent naive reimplementations used as test oracles.

Everything here is deliberately written the slow, obvious way (per-entry path
walks, BFS by hand) and must stay decoupled from the package's fast paths.
"""

from collections import deque


def follow_route(bundle, src, dst):
    """Walk the routing table; returns (vertex list, link list)."""
    n_chiplets = bundle.n_chiplets
    link_nodes = []
    for link in bundle.topology.links:
        ends = []
        for ep in (link.ep1, link.ep2):
            ends.append(ep.index if ep.kind == "chiplet" else n_chiplets + ep.index)
        link_nodes.append(tuple(ends))
    vertices = [src]
    links = []
    node = src
    for _ in range(bundle.n_nodes):
        if node == dst:
            return vertices, links
        li = bundle.routing_table.tables[node][dst]
        u, v = link_nodes[li]
        node = v if node == u else u
        vertices.append(node)
        links.append(li)
    if node == dst:
        return vertices, links
    raise AssertionError(f"route {src}->{dst} did not terminate")


def edge_weight(bundle, link_index):
    """Link latency plus the PHY latency of every chiplet endpoint."""
    from icikit import geometry

    link = bundle.topology.links[link_index]
    positions = []
    phy_sum = 0.0
    for ep in (link.ep1, link.ep2):
        positions.append(geometry.endpoint_position(bundle, ep))
        if ep.kind == "chiplet":
            phy_sum += bundle.chiplet_at(ep.index).phy_latency_cycles
    length = geometry.link_length(positions[0], positions[1],
                                  bundle.packaging.link_routing)
    return bundle.packaging.link_latency.cycles(length) + phy_sum


def vertex_weight(bundle, node):
    if node < bundle.n_chiplets:
        return bundle.chiplet_at(node).internal_latency_cycles
    return bundle.packaging.router_latency_cycles


def naive_latency(bundle):
    """Traffic-weighted average of per-entry path sums (all vertex weights on
    the route plus all edge weights)."""
    weighted = 0.0
    total = 0.0
    for entry in bundle.traffic.entries:
        if entry.amount == 0:
            continue
        vertices, links = follow_route(bundle, entry.src, entry.dst)
        path = sum(vertex_weight(bundle, v) for v in vertices)
        path += sum(edge_weight(bundle, li) for li in links)
        weighted += entry.amount * path
        total += entry.amount
    return weighted / total


def naive_flows(bundle):
    """Per-link traffic sums by walking every entry's route."""
    flows = [0.0] * len(bundle.topology.links)
    for entry in bundle.traffic.entries:
        if entry.amount == 0:
            continue
        _, links = follow_route(bundle, entry.src, entry.dst)
        for li in links:
            flows[li] += entry.amount
    return flows


def bfs_distances(bundle_or_adjacency, start):
    """Hop distances over the node graph."""
    if isinstance(bundle_or_adjacency, list):
        adjacency = bundle_or_adjacency
    else:
        bundle = bundle_or_adjacency
        n_chiplets = bundle.n_chiplets
        adjacency = [[] for _ in range(bundle.n_nodes)]
        for link in bundle.topology.links:
            ends = []
            for ep in (link.ep1, link.ep2):
                ends.append(ep.index if ep.kind == "chiplet" else n_chiplets + ep.index)
            adjacency[ends[0]].append(ends[1])
            adjacency[ends[1]].append(ends[0])
    dist = [-1] * len(adjacency)
    dist[start] = 0
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nbr in adjacency[node]:
            if dist[nbr] < 0:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return dist


def topology_adjacency(topology, n_nodes, n_chiplets=None):
    if n_chiplets is None:
        n_chiplets = n_nodes
    adjacency = [[] for _ in range(n_nodes)]
    for link in topology.links:
        ends = []
        for ep in (link.ep1, link.ep2):
            ends.append(ep.index if ep.kind == "chiplet" else n_chiplets + ep.index)
        adjacency[ends[0]].append(ends[1])
        adjacency[ends[1]].append(ends[0])
    return adjacency


def analytic_packet_latency(bundle, src, dst):
    """Cycle count of one isolated packet: per hop the router residency
    max(4, node weight) plus PHY latencies and the ceil'd link latency, plus
    the destination's consume cycles."""
    import math

    from icikit import geometry

    vertices, links = follow_route(bundle, src, dst)
    total = 0
    for v, li in zip(vertices[:-1], links):
        total += max(4, math.ceil(vertex_weight(bundle, v) - 1e-9))
        link = bundle.topology.links[li]
        phy_sum = 0.0
        positions = []
        for ep in (link.ep1, link.ep2):
            positions.append(geometry.endpoint_position(bundle, ep))
            if ep.kind == "chiplet":
                phy_sum += bundle.chiplet_at(ep.index).phy_latency_cycles
        length = geometry.link_length(positions[0], positions[1],
                                      bundle.packaging.link_routing)
        total += math.ceil(bundle.packaging.link_latency.cycles(length) - 1e-9)
        total += math.ceil(phy_sum - 1e-9)
    total += math.ceil(vertex_weight(bundle, vertices[-1]) - 1e-9)
    return total
