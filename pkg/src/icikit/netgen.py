"""Input generators for automated design-space exploration: chiplets with PHY
placements, grid/hex placements, topologies, deadlock-free routing tables, and
synthetic traffic patterns.

Topology generators produce canonical link lists: node pairs are emitted in
sorted order and PHY indices are assigned per node with a running counter, so
two generators emitting the same pair set produce identical topologies.
"""

from __future__ import annotations

import math
import random
from collections import deque

from .model import (ChipletDef, Endpoint, IcikitError, Link, PhyDef, PlacedChiplet,
                    Placement, RoutingError, RoutingTable, Topology, Traffic,
                    TrafficEntry)

PHY_STYLES = ("perimeter_even", "corners", "edge_centers", "row_banks")
TOPOLOGY_KINDS = ("mesh", "torus", "folded_torus", "flattened_butterfly",
                  "hypercube", "hexamesh", "shg")
ROUTING_ALGORITHMS = ("lowest_id", "turn_random")
TRAFFIC_PATTERNS = ("uniform", "transpose", "permutation", "hotspot")


# ---------------------------------------------------------------------------
# Chiplets


def phy_positions(style: str, count: int, width: float, height: float):
    """Place `count` PHYs on a w x h footprint according to a named style."""
    if count < 1:
        raise IcikitError("a chiplet needs at least one PHY")
    if style == "perimeter_even":
        perimeter = 2.0 * (width + height)
        points = []
        for i in range(count):
            t = (i + 0.5) * perimeter / count
            if t < width:                       # bottom, left to right
                points.append((t, 0.0))
            elif t < width + height:            # right, bottom to top
                points.append((width, t - width))
            elif t < 2 * width + height:        # top, right to left
                points.append((2 * width + height - t, height))
            else:                               # left, top to bottom
                points.append((0.0, perimeter - t))
        return points
    if style == "corners":
        corners = [(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)]
        if count > 4:
            raise IcikitError(f"corners style hosts at most 4 PHYs, got {count}")
        return corners[:count]
    if style == "edge_centers":
        centers = [(0.0, height / 2), (width / 2, height), (width, height / 2),
                   (width / 2, 0.0)]
        if count > 4:
            raise IcikitError(f"edge_centers style hosts at most 4 PHYs, got {count}")
        return centers[:count]
    if style == "row_banks":
        bottom = (count + 1) // 2
        top = count - bottom
        points = [((i + 0.5) * width / bottom, 0.0) for i in range(bottom)]
        points += [((i + 0.5) * width / top, height) for i in range(top)]
        return points
    raise IcikitError(f"unknown PHY placement style '{style}'")


def select_phy_style(kind: str, max_degree: int) -> str:
    """Style policy: corner PHYs for low-radix grid kinds, evenly spread
    perimeter PHYs for everything else."""
    if kind in ("mesh", "torus", "folded_torus") and max_degree <= 4:
        return "corners"
    return "perimeter_even"


def generate_chiplet(base_area_mm2: float, base_power_w: float, phy_count: int,
                     phy_area_overhead_mm2: float, phy_power_overhead_w: float,
                     style: str, bump_pitch_mm: float,
                     internal_latency_cycles: float, phy_latency_cycles: float,
                     bump_budget: float = 1.0, name: str = "chiplet",
                     kind: str = "compute") -> ChipletDef:
    """Square chiplet sized for its PHY count, with per-PHY area and power
    overheads and the bump budget split evenly across PHYs."""
    area = base_area_mm2 + phy_count * phy_area_overhead_mm2
    side = math.sqrt(area)
    positions = phy_positions(style, phy_count, side, side)
    fraction = bump_budget / phy_count
    return ChipletDef(
        name=name,
        width_mm=side,
        height_mm=side,
        internal_latency_cycles=internal_latency_cycles,
        phy_latency_cycles=phy_latency_cycles,
        power_w=base_power_w + phy_count * phy_power_overhead_w,
        bump_pitch_mm=bump_pitch_mm,
        phys=[PhyDef(x, y, fraction) for x, y in positions],
        kind=kind,
    )


# ---------------------------------------------------------------------------
# Placements


def generate_placement(kind: str, rows: int, cols: int, chiplet: ChipletDef,
                       spacing_mm: float = 0.0,
                       names: list[str] | None = None) -> Placement:
    """Row-major grid placement; the hex variant offsets odd rows by half a
    pitch (brick pattern).  `names` optionally assigns a per-instance chiplet
    name (heterogeneous designs); the pitch always follows `chiplet`."""
    if rows < 1 or cols < 1:
        raise IcikitError("placement needs at least one row and one column")
    if names is not None and len(names) != rows * cols:
        raise IcikitError(f"expected {rows * cols} names, got {len(names)}")
    pitch_x = chiplet.width_mm + spacing_mm
    pitch_y = chiplet.height_mm + spacing_mm
    instances = []
    for r in range(rows):
        offset = pitch_x / 2.0 if (kind == "hex" and r % 2 == 1) else 0.0
        for c in range(cols):
            name = names[r * cols + c] if names is not None else chiplet.name
            instances.append(PlacedChiplet(name, c * pitch_x + offset, r * pitch_y, 0))
    if kind not in ("grid", "hex"):
        raise IcikitError(f"unknown placement kind '{kind}'")
    return Placement(instances, [])


# ---------------------------------------------------------------------------
# Topologies (node-pair construction, then canonical link emission)


def _links_from_pairs(pairs) -> Topology:
    counters: dict[int, int] = {}
    links = []
    for u, v in sorted(pairs):
        pu = counters.get(u, 0)
        counters[u] = pu + 1
        pv = counters.get(v, 0)
        counters[v] = pv + 1
        links.append(Link(Endpoint("chiplet", u, pu), Endpoint("chiplet", v, pv)))
    return Topology(links)


def _mesh_pairs(rows, cols):
    pairs = set()
    for r in range(rows):
        for c in range(cols):
            n = r * cols + c
            if c + 1 < cols:
                pairs.add((n, n + 1))
            if r + 1 < rows:
                pairs.add((n, n + cols))
    return pairs


def _ring_pairs(count):
    """One dimension of a torus; wraparound omitted where it would duplicate."""
    pairs = {(i, i + 1) for i in range(count - 1)}
    if count > 2:
        pairs.add((0, count - 1))
    return pairs


def _folded_ring_pairs(count):
    """Torus ring rewired so every link spans at most two grid steps."""
    if count < 2:
        return set()
    if count == 2:
        return {(0, 1)}
    pairs = {(0, 1), (count - 2, count - 1)}
    pairs.update((i, i + 2) for i in range(count - 2))
    return pairs


def _by_row_col(rows, cols, row_pairs_fn, col_pairs_fn):
    pairs = set()
    for r in range(rows):
        for a, b in row_pairs_fn(cols):
            pairs.add((r * cols + a, r * cols + b))
    for c in range(cols):
        for a, b in col_pairs_fn(rows):
            pairs.add((min(a * cols + c, b * cols + c), max(a * cols + c, b * cols + c)))
    return pairs


def _all_to_all_pairs(count):
    return {(a, b) for a in range(count) for b in range(a + 1, count)}


def _hexamesh_pairs(rows, cols):
    pairs = set()
    for r in range(rows):
        for c in range(cols):
            n = r * cols + c
            if c + 1 < cols:
                pairs.add((n, n + 1))
            if r + 1 < rows:
                shift = 0 if r % 2 == 0 else 1  # odd rows sit half a pitch right
                for cc in (c - 1 + shift, c + shift):
                    if 0 <= cc < cols:
                        pairs.add((n, (r + 1) * cols + cc))
    return pairs


def _hypercube_pairs(rows, cols):
    n = rows * cols
    if n < 2 or n & (n - 1):
        raise IcikitError(f"hypercube needs a power-of-two node count, got {n}")
    pairs = set()
    for i in range(n):
        bit = 1
        while i | bit < n:
            if not i & bit:
                pairs.add((i, i | bit))
            bit <<= 1
    return pairs


def generate_topology(kind: str, rows: int, cols: int) -> Topology:
    """Link set of a named topology over the row-major grid numbering."""
    if rows < 1 or cols < 1:
        raise IcikitError("topology needs at least one row and one column")
    if kind == "mesh":
        pairs = _mesh_pairs(rows, cols)
    elif kind == "torus":
        pairs = _by_row_col(rows, cols, _ring_pairs, _ring_pairs)
    elif kind == "folded_torus":
        pairs = _by_row_col(rows, cols, _folded_ring_pairs, _folded_ring_pairs)
    elif kind == "flattened_butterfly":
        pairs = _by_row_col(rows, cols, _all_to_all_pairs, _all_to_all_pairs)
    elif kind == "hypercube":
        pairs = _hypercube_pairs(rows, cols)
    elif kind == "hexamesh":
        pairs = _hexamesh_pairs(rows, cols)
    else:
        raise IcikitError(f"unsupported topology kind '{kind}' for direct generation")
    if not pairs and rows * cols > 1:
        raise IcikitError(f"{kind} over {rows}x{cols} produces no links")
    return _links_from_pairs(pairs)


def shg_bit_count(rows: int, cols: int) -> int:
    if rows < 3 or cols < 3:
        raise IcikitError("the hybrid grid family needs at least a 3x3 grid")
    return rows + cols - 4


def generate_shg(rows: int, cols: int, bits) -> Topology:
    """Hybrid grid between mesh and flattened butterfly: one bit per interior
    row/column upgrades it from consecutive links to all-to-all links; the
    boundary rows and columns upgrade only when every bit is set."""
    expected = shg_bit_count(rows, cols)
    bits = list(bits)
    if len(bits) != expected:
        raise IcikitError(f"expected {expected} bits for {rows}x{cols}, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise IcikitError("bits must be 0 or 1")
    all_set = all(bits)
    row_up = {r: bool(bits[r - 1]) for r in range(1, rows - 1)}
    col_up = {c: bool(bits[rows - 2 + c - 1]) for c in range(1, cols - 1)}

    def row_fn_for(r):
        upgraded = all_set if r in (0, rows - 1) else row_up[r]
        return _all_to_all_pairs if upgraded else (lambda n: {(i, i + 1) for i in range(n - 1)})

    pairs = set()
    for r in range(rows):
        for a, b in row_fn_for(r)(cols):
            pairs.add((r * cols + a, r * cols + b))
    for c in range(cols):
        upgraded = all_set if c in (0, cols - 1) else col_up[c]
        col_pairs = _all_to_all_pairs(rows) if upgraded else {(i, i + 1) for i in range(rows - 1)}
        for a, b in col_pairs:
            pairs.add((a * cols + c, b * cols + c))
    return _links_from_pairs(pairs)


def topology_degrees(topology: Topology, n_chiplets: int) -> list[int]:
    degrees = [0] * n_chiplets
    for link in topology.links:
        for ep in (link.ep1, link.ep2):
            if ep.kind == "chiplet":
                degrees[ep.index] += 1
    return degrees


# ---------------------------------------------------------------------------
# Routing tables


def _topology_adjacency(topology, n_nodes, n_chiplets):
    """(neighbor, link index) adjacency, neighbors sorted ascending."""
    adjacency = [[] for _ in range(n_nodes)]
    for li, link in enumerate(topology.links):
        u = link.ep1.index if link.ep1.kind == "chiplet" else n_chiplets + link.ep1.index
        v = link.ep2.index if link.ep2.kind == "chiplet" else n_chiplets + link.ep2.index
        adjacency[u].append((v, li))
        adjacency[v].append((u, li))
    for lst in adjacency:
        lst.sort()
    return adjacency


def _bfs_distances(adjacency, start):
    dist = [-1] * len(adjacency)
    dist[start] = 0
    queue = deque([start])
    while queue:
        node = queue.popleft()
        d = dist[node] + 1
        for nbr, _ in adjacency[node]:
            if dist[nbr] < 0:
                dist[nbr] = d
                queue.append(nbr)
    return dist


def _lowest_id_tables(adjacency, n_chiplets):
    n_nodes = len(adjacency)
    tables = [dict() for _ in range(n_nodes)]
    for dst in range(n_chiplets):
        dist = _bfs_distances(adjacency, dst)
        for node in range(n_nodes):
            if node == dst or dist[node] < 0:
                continue
            want = dist[node] - 1
            for nbr, li in adjacency[node]:  # sorted: first hit is the lowest id
                if dist[nbr] == want:
                    tables[node][dst] = li
                    break
    return tables


class _TurnGraph:
    """Directed-link dual graph with cycle-breaking turn prohibition.

    Directed link 2*li+0 runs ep1->ep2 of link li, 2*li+1 the reverse.  A turn
    connects an incoming link of a node to an outgoing link of the same node
    (u-turns excluded).  Links are oriented along a search tree grown from
    node 0 in ascending node order: a link ascends when it moves to a
    (tree level, id)-smaller node.  Turns from a descending link into an
    ascending one are forbidden; every dependency cycle must contain one, so
    the permitted turn graph is acyclic, while ascend-then-descend paths keep
    every pair connected.
    """

    def __init__(self, adjacency):
        n_nodes = len(adjacency)
        tail = {}
        head = {}
        out_links = [[] for _ in range(n_nodes)]
        for node in range(n_nodes):
            for nbr, li in adjacency[node]:
                d = 2 * li + (0 if node < nbr else 1)
                tail[d] = node
                head[d] = nbr
                out_links[node].append(d)
        level = _bfs_distances(adjacency, 0)
        if any(l < 0 for l in level):
            unreachable = [i for i, l in enumerate(level) if l < 0]
            raise RoutingError(f"nodes {unreachable} unreachable from node 0")
        self.adjacency = adjacency
        self.tail = tail
        self.head = head
        self.out_links = [sorted(lst) for lst in out_links]
        self.ascending = {d: (level[head[d]], head[d]) < (level[tail[d]], tail[d])
                          for d in tail}

    def permitted(self, incoming, outgoing) -> bool:
        if self.tail[incoming] == self.head[outgoing]:
            return False  # u-turn
        # Forbidden: descending link followed by an ascending one.
        return self.ascending[incoming] or not self.ascending[outgoing]

    def link_costs_to(self, dst):
        """Per directed link: minimal link count of a permitted-turn path that
        starts by traversing it and ends at dst."""
        cost = {}
        queue = deque()
        for nbr, li in self.adjacency[dst]:
            d = 2 * li + (0 if nbr < dst else 1)  # directed nbr -> dst
            cost[d] = 1
            queue.append(d)
        while queue:
            d = queue.popleft()
            c = cost[d] + 1
            tail_d = self.tail[d]
            for nbr, li in self.adjacency[tail_d]:
                prev = 2 * li + (0 if nbr < tail_d else 1)  # nbr -> tail(d)
                if prev not in cost and self.permitted(prev, d):
                    cost[prev] = c
                    queue.append(prev)
        return cost


def _turn_random_tables(adjacency, n_chiplets, seed):
    n_nodes = len(adjacency)
    graph = _TurnGraph(adjacency)
    rng = random.Random(seed)
    tables = [dict() for _ in range(n_nodes)]
    for dst in range(n_chiplets):
        cost = graph.link_costs_to(dst)
        node_dist = {dst: 0}
        for node in range(n_nodes):
            if node == dst:
                continue
            finite = [cost[d] for d in graph.out_links[node] if d in cost]
            if finite:
                node_dist[node] = min(finite)
        missing = [n for n in range(n_nodes) if n not in node_dist]
        if missing:
            raise RoutingError(
                f"turn restriction disconnects node {missing[0]} from destination {dst}")
        out_choice: dict[int, int] = {}
        real_len = {dst: 0}
        # Process nodes outward from the destination; every choice points at an
        # already-decided node, so table-following terminates by construction.
        for node in sorted((n for n in node_dist if n != dst),
                           key=lambda n: (node_dist[n], n)):
            target = node_dist[node]
            strict = []
            fallback = []
            for d in graph.out_links[node]:
                nxt = graph.head[d]
                if nxt == dst:
                    (strict if cost.get(d) == target else fallback).append((d, 1))
                    continue
                chosen = out_choice.get(nxt)
                if chosen is None or not graph.permitted(d, chosen):
                    continue
                length = 1 + real_len[nxt]
                if cost.get(d) == target and length == target:
                    strict.append((d, length))
                else:
                    fallback.append((d, length))
            pool = strict
            if pool:
                # Prefer descending hops: any turn into them stays permitted,
                # which keeps upstream arrivals minimal as well.
                descending = [c for c in pool if not graph.ascending[c[0]]]
                if descending:
                    pool = descending
            else:
                if not fallback:
                    raise RoutingError(
                        f"turn restriction leaves node {node} without a consistent "
                        f"next hop toward destination {dst}")
                best = min(length for _, length in fallback)
                pool = [(d, length) for d, length in fallback if length == best]
            d, length = pool[rng.randrange(len(pool))]
            out_choice[node] = d
            real_len[node] = length
            tables[node][dst] = d // 2
    return tables


def generate_routing_table(topology: Topology, n_nodes: int, algorithm: str,
                           seed: int = 0, n_chiplets: int | None = None) -> RoutingTable:
    """Deadlock-aware routing tables for arbitrary topologies.

    lowest_id follows shortest paths and breaks ties toward the lowest node
    id.  turn_random forbids the turns closed by DFS back edges in the dual
    graph, then samples uniformly (seeded) among next hops that stay minimal
    within the permitted turns and consistent with downstream choices.
    """
    if n_chiplets is None:
        n_chiplets = n_nodes
    adjacency = _topology_adjacency(topology, n_nodes, n_chiplets)
    if any(not lst for lst in adjacency):
        isolated = [i for i, lst in enumerate(adjacency) if not lst]
        raise RoutingError(f"nodes {isolated} have no links")
    if algorithm == "lowest_id":
        tables = _lowest_id_tables(adjacency, n_chiplets)
        for dst in range(n_chiplets):
            for node in range(n_nodes):
                if node != dst and dst not in tables[node]:
                    raise RoutingError(f"node {node} cannot reach destination {dst}")
    elif algorithm == "turn_random":
        tables = _turn_random_tables(adjacency, n_chiplets, seed)
    else:
        raise IcikitError(f"unknown routing algorithm '{algorithm}'")
    return RoutingTable(tables)


def route_turn_set(topology: Topology, table: RoutingTable, n_nodes: int,
                   n_chiplets: int | None = None):
    """Directed-link turns actually taken by the table's routes."""
    if n_chiplets is None:
        n_chiplets = n_nodes
    links = []
    for link in topology.links:
        u = link.ep1.index if link.ep1.kind == "chiplet" else n_chiplets + link.ep1.index
        v = link.ep2.index if link.ep2.kind == "chiplet" else n_chiplets + link.ep2.index
        links.append((u, v))
    turns = set()
    for src in range(n_nodes):
        for dst in range(n_chiplets):
            if src == dst:
                continue
            node = src
            prev_dir = None
            for _ in range(n_nodes):
                li = table.tables[node].get(dst)
                if li is None:
                    raise RoutingError(f"node {node} has no entry for destination {dst}")
                u, v = links[li]
                direction = 2 * li + (0 if node == u else 1)
                if prev_dir is not None:
                    turns.add((prev_dir, direction))
                prev_dir = direction
                node = v if node == u else u
                if node == dst:
                    break
            else:
                raise RoutingError(f"routing loop from {src} to {dst}")
    return turns


def dependency_graph_is_acyclic(turns) -> bool:
    """Cycle check over the route-induced channel dependency graph."""
    successors: dict[int, list[int]] = {}
    for a, b in turns:
        successors.setdefault(a, []).append(b)
        successors.setdefault(b, [])
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {d: WHITE for d in successors}
    for root in successors:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(successors[root]))]
        color[root] = GRAY
        while stack:
            vertex, it = stack[-1]
            advanced = False
            for succ in it:
                if color[succ] == GRAY:
                    return False
                if color[succ] == WHITE:
                    color[succ] = GRAY
                    stack.append((succ, iter(successors[succ])))
                    advanced = True
                    break
            if not advanced:
                color[vertex] = BLACK
                stack.pop()
    return True


# ---------------------------------------------------------------------------
# Traffic


def generate_traffic(pattern: str, rows: int, cols: int, seed: int = 0,
                     hotspot_count: int = 4, hotspot_share: float = 0.5) -> Traffic:
    """Synthetic traffic over the row-major grid of chiplets."""
    n = rows * cols
    if n < 2:
        raise IcikitError("traffic needs at least two nodes")
    if pattern == "uniform":
        entries = [TrafficEntry(s, d, 1.0)
                   for s in range(n) for d in range(n) if s != d]
    elif pattern == "transpose":
        if rows != cols:
            raise IcikitError("transpose traffic needs a square grid")
        entries = []
        for r in range(rows):
            for c in range(cols):
                if r != c:
                    entries.append(TrafficEntry(r * cols + c, c * cols + r, 1.0))
    elif pattern == "permutation":
        rng = random.Random(seed)
        nodes = list(range(n))
        while True:  # derangement: retry until no fixed point (p -> 1/e)
            perm = nodes[:]
            rng.shuffle(perm)
            if all(perm[i] != i for i in range(n)):
                break
        entries = [TrafficEntry(s, perm[s], 1.0) for s in range(n)]
    elif pattern == "hotspot":
        if not 0 < hotspot_share < 1:
            raise IcikitError("hotspot share must be in (0, 1)")
        if not 0 < hotspot_count < n:
            raise IcikitError("hotspot count must be in (0, n)")
        if hotspot_share * n <= hotspot_count:
            raise IcikitError(
                "hotspot share not above the uniform baseline; lower the count "
                "or raise the share")
        rng = random.Random(seed)
        hotspots = set(rng.sample(range(n), hotspot_count))
        # Background 1.0 everywhere plus `extra` into hotspots, solved so that
        # exactly `hotspot_share` of all traffic flows into the hotspot nodes.
        extra = (hotspot_share * n - hotspot_count) / (hotspot_count * (1.0 - hotspot_share))
        entries = [TrafficEntry(s, d, 1.0 + (extra if d in hotspots else 0.0))
                   for s in range(n) for d in range(n) if s != d]
    else:
        raise IcikitError(f"unknown traffic pattern '{pattern}'")
    return Traffic(entries)
