"""Cross-validation of a loaded design bundle.

Violations are data, not exceptions: validate() returns a list and an empty
list means the bundle is internally consistent.  ValidationFailure wraps a
non-empty report for callers that need to abort (the CLI maps it to exit 1).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import geometry
from .model import DesignBundle, IcikitError

_FRACTION_SLACK = 1e-9  # tolerate accumulated float error in sum-of-fractions


@dataclass(slots=True)
class Violation:
    kind: str          # input kind the violation belongs to
    index: int | None  # element index within that input, if applicable
    message: str

    def __str__(self):
        where = self.kind if self.index is None else f"{self.kind}[{self.index}]"
        return f"{where}: {self.message}"


class ValidationFailure(IcikitError):
    def __init__(self, report: list[Violation]):
        self.report = report
        lines = "\n".join(f"  - {v}" for v in report)
        super().__init__(f"design has {len(report)} validation violation(s):\n{lines}")


def _check_chiplets(bundle, out):
    for name, c in bundle.chiplets.items():
        if c.width_mm <= 0 or c.height_mm <= 0:
            out.append(Violation("chiplets", None, f"'{name}': footprint sides must be > 0"))
            continue
        if c.bump_pitch_mm <= 0:
            out.append(Violation("chiplets", None, f"'{name}': bump pitch must be > 0"))
        if c.internal_latency_cycles < 0 or c.phy_latency_cycles < 0:
            out.append(Violation("chiplets", None, f"'{name}': latencies must be >= 0"))
        if c.power_w < 0:
            out.append(Violation("chiplets", None, f"'{name}': power must be >= 0"))
        fraction_sum = 0.0
        for i, phy in enumerate(c.phys):
            if not 0.0 < phy.area_fraction <= 1.0:
                out.append(Violation("chiplets", None,
                                     f"'{name}' phy {i}: area fraction must be in (0, 1]"))
            fraction_sum += phy.area_fraction
            if not (0.0 <= phy.x_mm <= c.width_mm and 0.0 <= phy.y_mm <= c.height_mm):
                out.append(Violation("chiplets", None,
                                     f"'{name}' phy {i}: position outside the footprint"))
        if fraction_sum > 1.0 + _FRACTION_SLACK:
            out.append(Violation("chiplets", None,
                                 f"'{name}': PHY area fractions sum to {fraction_sum:.6g} > 1"))


def _check_placement(bundle, out):
    rects = []
    for i, inst in enumerate(bundle.placement.chiplets):
        chiplet = bundle.chiplets.get(inst.name)
        if chiplet is None:
            out.append(Violation("placement", i, f"unknown chiplet '{inst.name}'"))
            continue
        w, h = geometry.rotated_dimensions(chiplet, inst.rotation)
        rects.append((i, inst.x_mm, inst.y_mm, w, h))
    # Strict-interior overlap: touching edges are legal (chiplets may abut).
    for a in range(len(rects)):
        ia, xa, ya, wa, ha = rects[a]
        for b in range(a + 1, len(rects)):
            ib, xb, yb, wb, hb = rects[b]
            if xa < xb + wb and xb < xa + wa and ya < yb + hb and yb < ya + ha:
                out.append(Violation("placement", ib,
                                     f"footprint overlaps instance {ia}"))
    if bundle.placement.interposer_routers and not bundle.packaging.has_active_interposer:
        out.append(Violation("placement", None,
                             "interposer routers present but the interposer is not active"))


def node_adjacency(bundle) -> list[list[tuple[int, int]]]:
    """Adjacency over network nodes as (neighbor, link index) lists, sorted by
    neighbor id.  Chiplet instances come first, then interposer routers."""
    n_chiplets = bundle.n_chiplets
    adjacency = [[] for _ in range(bundle.n_nodes)]
    for li, link in enumerate(bundle.topology.links):
        ends = []
        for ep in (link.ep1, link.ep2):
            node = ep.index if ep.kind == "chiplet" else n_chiplets + ep.index
            ends.append(node)
        adjacency[ends[0]].append((ends[1], li))
        adjacency[ends[1]].append((ends[0], li))
    for lst in adjacency:
        lst.sort()
    return adjacency


def _endpoint_node(bundle, ep):
    return ep.index if ep.kind == "chiplet" else bundle.n_chiplets + ep.index


def _check_topology(bundle, out):
    n_chiplets = bundle.n_chiplets
    n_routers = len(bundle.placement.interposer_routers)
    used_phys = {}
    seen_pairs = {}
    ok = True
    for li, link in enumerate(bundle.topology.links):
        resolved = True
        for ep in (link.ep1, link.ep2):
            if ep.kind == "chiplet":
                if not 0 <= ep.index < n_chiplets:
                    out.append(Violation("topology", li,
                                         f"chiplet index {ep.index} out of range"))
                    resolved = False
                    continue
                chiplet = bundle.chiplet_at(ep.index)
                if not 0 <= ep.phy < len(chiplet.phys):
                    out.append(Violation("topology", li,
                                         f"phy index {ep.phy} out of range for "
                                         f"chiplet '{chiplet.name}'"))
                    resolved = False
                    continue
                key = (ep.index, ep.phy)
                if key in used_phys:
                    out.append(Violation("topology", li,
                                         f"(chiplet {ep.index}, phy {ep.phy}) already "
                                         f"used by link {used_phys[key]}"))
                else:
                    used_phys[key] = li
            else:
                if not 0 <= ep.index < n_routers:
                    out.append(Violation("topology", li,
                                         f"interposer router index {ep.index} out of range"))
                    resolved = False
        if not resolved:
            ok = False
            continue
        u = _endpoint_node(bundle, link.ep1)
        v = _endpoint_node(bundle, link.ep2)
        if u == v:
            out.append(Violation("topology", li, "self-link"))
            ok = False
            continue
        pair = (min(u, v), max(u, v))
        if pair in seen_pairs:
            out.append(Violation("topology", li,
                                 f"duplicate link (same endpoints as link {seen_pairs[pair]})"))
        else:
            seen_pairs[pair] = li
    if not ok or n_chiplets == 0:
        return
    # Connectivity: every chiplet reachable from chiplet 0 (paths may cross routers).
    adjacency = node_adjacency(bundle)
    seen = [False] * bundle.n_nodes
    queue = deque([0])
    seen[0] = True
    while queue:
        node = queue.popleft()
        for nbr, _ in adjacency[node]:
            if not seen[nbr]:
                seen[nbr] = True
                queue.append(nbr)
    unreachable = [i for i in range(n_chiplets) if not seen[i]]
    if unreachable:
        out.append(Violation("topology", None,
                             f"chiplets {unreachable} unreachable from chiplet 0"))


def _check_packaging(bundle, out):
    p = bundle.packaging
    for field_name in ("router_latency_cycles", "link_power_per_mm_w",
                       "interposer_power_w", "packaging_cost"):
        if getattr(p, field_name) < 0:
            out.append(Violation("packaging", None, f"{field_name} must be >= 0"))
    if p.non_data_wires < 0:
        out.append(Violation("packaging", None, "non_data_wires must be >= 0"))
    if p.link_latency.value < 0:
        out.append(Violation("packaging", None, "link latency must be >= 0"))


def _check_routing(bundle, out):
    n_nodes = bundle.n_nodes
    n_chiplets = bundle.n_chiplets
    tables = bundle.routing_table.tables
    if len(tables) != n_nodes:
        out.append(Violation("routing_table", None,
                             f"expected {n_nodes} per-node tables, got {len(tables)}"))
        return
    adjacency = node_adjacency(bundle)
    n_links = len(bundle.topology.links)
    link_nodes = []
    for link in bundle.topology.links:
        link_nodes.append((_endpoint_node(bundle, link.ep1),
                           _endpoint_node(bundle, link.ep2)))
    structurally_ok = True
    for node, table in enumerate(tables):
        for dst, li in table.items():
            if not 0 <= dst < n_chiplets:
                out.append(Violation("routing_table", node,
                                     f"destination {dst} is not a chiplet index"))
                structurally_ok = False
            elif not 0 <= li < n_links:
                out.append(Violation("routing_table", node,
                                     f"link index {li} out of range"))
                structurally_ok = False
            elif node not in link_nodes[li]:
                out.append(Violation("routing_table", node,
                                     f"link {li} is not incident to this node"))
                structurally_ok = False
    if not structurally_ok:
        return
    # Every (source node, destination chiplet) pair must terminate in <= n hops.
    for src in range(n_nodes):
        for dst in range(n_chiplets):
            if src == dst:
                continue
            node = src
            for _ in range(n_nodes):
                if node == dst:
                    break
                entry = tables[node].get(dst)
                if entry is None:
                    out.append(Violation("routing_table", node,
                                         f"missing entry for destination {dst} "
                                         f"(needed by source {src})"))
                    break
                u, v = link_nodes[entry]
                node = v if node == u else u
            else:
                out.append(Violation("routing_table", src,
                                     f"route to {dst} does not terminate "
                                     f"within {n_nodes} hops"))


def _check_traffic(bundle, out):
    n_chiplets = bundle.n_chiplets
    total = 0.0
    for i, e in enumerate(bundle.traffic.entries):
        if e.src == e.dst:
            out.append(Violation("traffic", i, "source equals destination"))
        if not 0 <= e.src < n_chiplets or not 0 <= e.dst < n_chiplets:
            out.append(Violation("traffic", i, "endpoint is not a chiplet index"))
        if e.amount < 0:
            out.append(Violation("traffic", i, "amount must be >= 0"))
        total += e.amount
    if bundle.traffic.entries and total <= 0:
        out.append(Violation("traffic", None, "total traffic must be > 0"))


def _check_trace(bundle, out):
    if bundle.trace is None:
        return
    n_chiplets = bundle.n_chiplets
    ids = {}
    for i, m in enumerate(bundle.trace.messages):
        if m.id in ids:
            out.append(Violation("trace", i, f"duplicate message id {m.id}"))
        ids[m.id] = m
        if m.src == m.dst:
            out.append(Violation("trace", i, "source equals destination"))
        if not 0 <= m.src < n_chiplets or not 0 <= m.dst < n_chiplets:
            out.append(Violation("trace", i, "endpoint is not a chiplet index"))
        if m.size_flits < 1:
            out.append(Violation("trace", i, "size_flits must be >= 1"))
        if m.earliest_injection_cycle < 0:
            out.append(Violation("trace", i, "earliest_injection_cycle must be >= 0"))
    for i, m in enumerate(bundle.trace.messages):
        for dep in m.deps:
            if dep not in ids:
                out.append(Violation("trace", i, f"dependency {dep} does not exist"))
    # Kahn's algorithm: any residue means a dependency cycle.
    indegree = {m.id: 0 for m in bundle.trace.messages}
    dependents = {m.id: [] for m in bundle.trace.messages}
    for m in bundle.trace.messages:
        for dep in set(m.deps):
            if dep in indegree:
                indegree[m.id] += 1
                dependents[dep].append(m.id)
    queue = deque(mid for mid, deg in indegree.items() if deg == 0)
    done = 0
    while queue:
        mid = queue.popleft()
        done += 1
        for nxt in dependents[mid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    if done < len(indegree):
        out.append(Violation("trace", None, "dependency relation contains a cycle"))


def _check_technology(bundle, out):
    for name, node in bundle.tech_nodes.items():
        if node.wafer_diameter_mm <= 0 or node.wafer_cost <= 0:
            out.append(Violation("technology", None,
                                 f"node '{name}': wafer diameter and cost must be > 0"))
        if node.clustering_parameter <= 0:
            out.append(Violation("technology", None,
                                 f"node '{name}': clustering parameter must be > 0"))
        if node.defect_density_per_mm2 < 0:
            out.append(Violation("technology", None,
                                 f"node '{name}': defect density must be >= 0"))
    for name, node_name in bundle.tech_assignment.items():
        if name not in bundle.chiplets:
            out.append(Violation("technology", None,
                                 f"assignment names unknown chiplet '{name}'"))
        if node_name not in bundle.tech_nodes:
            out.append(Violation("technology", None,
                                 f"assignment for '{name}' names unknown node '{node_name}'"))
    for inst in bundle.placement.chiplets:
        if inst.name in bundle.chiplets and inst.name not in bundle.tech_assignment:
            out.append(Violation("technology", None,
                                 f"placed chiplet '{inst.name}' has no technology node"))
            break


def validate(bundle: DesignBundle, structural_only: bool = False) -> list[Violation]:
    """Check every cross-input invariant; an empty report means valid.

    structural_only skips the per-pair routing walk (the sweep driver relies
    on the proxies' own loop guard instead, which covers the same failure).
    """
    out: list[Violation] = []
    _check_chiplets(bundle, out)
    _check_placement(bundle, out)
    _check_packaging(bundle, out)
    if any(v.kind == "placement" and "unknown chiplet" in v.message for v in out):
        return out  # later checks would chase dangling names
    _check_topology(bundle, out)
    if not structural_only and not any(v.kind == "topology" for v in out):
        _check_routing(bundle, out)
    _check_traffic(bundle, out)
    _check_trace(bundle, out)
    _check_technology(bundle, out)
    return out


def validate_or_raise(bundle: DesignBundle) -> None:
    report = validate(bundle)
    if report:
        raise ValidationFailure(report)
