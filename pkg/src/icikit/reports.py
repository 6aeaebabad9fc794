"""Area, power, and manufacturing-cost reports.

The cost model is deliberately simple: a negative-binomial yield over the die
area and a circular-wafer dies-per-wafer estimate with an edge-loss term, both
pure functions of the chiplet area and its technology node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import geometry, proxy
from .model import DesignBundle, IcikitError, TechNode


@dataclass(slots=True)
class ChipletCost:
    die_cost: float
    yield_fraction: float
    dies_per_wafer: int


@dataclass(slots=True)
class CostBreakdown:
    per_chiplet: dict[str, ChipletCost]
    packaging_cost: float
    total_cost: float

    def to_json(self) -> dict:
        return {"per_chiplet": {name: {"die_cost": c.die_cost,
                                       "yield": c.yield_fraction,
                                       "dies_per_wafer": c.dies_per_wafer}
                                for name, c in self.per_chiplet.items()},
                "packaging_cost": self.packaging_cost,
                "total_cost": self.total_cost}


def area_report(bundle: DesignBundle) -> dict:
    """Sum of placed chiplet areas plus the enclosing interposer rectangle."""
    chiplet_sum = sum(bundle.chiplet_at(i).area_mm2 for i in range(bundle.n_chiplets))
    width, height = geometry.enclosing_rectangle(bundle.placement, bundle.chiplets)
    return {"chiplet_area_sum_mm2": chiplet_sum,
            "interposer_area_mm2": width * height,
            "interposer_width_mm": width,
            "interposer_height_mm": height}


def power_report(bundle: DesignBundle, graph: proxy.IciGraph | None = None) -> float:
    """Chiplet power + interposer power + length-dependent link power."""
    total = sum(bundle.chiplet_at(i).power_w for i in range(bundle.n_chiplets))
    total += bundle.packaging.interposer_power_w
    per_mm = bundle.packaging.link_power_per_mm_w
    if per_mm > 0:
        if graph is None:
            graph = proxy.build_ici_graph(bundle)
        total += per_mm * sum(e.length_mm for e in graph.edges)
    return total


def manufacturing_yield(area_mm2: float, tech: TechNode) -> float:
    """Negative-binomial yield: (1 + A*D0/alpha)^(-alpha)."""
    if area_mm2 <= 0:
        raise IcikitError("yield is defined for positive die area only")
    d0 = tech.defect_density_per_mm2
    alpha = tech.clustering_parameter
    return (1.0 + area_mm2 * d0 / alpha) ** (-alpha)


def dies_per_wafer(area_mm2: float, tech: TechNode) -> int:
    """Circular-wafer die count with an edge-loss correction term."""
    d = tech.wafer_diameter_mm
    count = math.floor(math.pi * (d / 2.0) ** 2 / area_mm2
                       - math.pi * d / math.sqrt(2.0 * area_mm2))
    if count <= 0:
        raise IcikitError(
            f"no dies fit on a {d:.6g} mm wafer for a {area_mm2:.6g} mm^2 chiplet")
    return count


def cost_report(bundle: DesignBundle) -> CostBreakdown:
    """Die cost per placed instance (wafer cost over good dies) plus the flat
    packaging cost."""
    per_chiplet = {}
    placed_names = [inst.name for inst in bundle.placement.chiplets]
    for name in sorted(set(placed_names)):
        chiplet = bundle.chiplets[name]
        node_name = bundle.tech_assignment.get(name)
        if node_name is None or node_name not in bundle.tech_nodes:
            raise IcikitError(f"chiplet '{name}' has no technology node assigned")
        tech = bundle.tech_nodes[node_name]
        dpw = dies_per_wafer(chiplet.area_mm2, tech)
        y = manufacturing_yield(chiplet.area_mm2, tech)
        per_chiplet[name] = ChipletCost(die_cost=tech.wafer_cost / (dpw * y),
                                        yield_fraction=y, dies_per_wafer=dpw)
    total = sum(per_chiplet[name].die_cost for name in placed_names)
    total += bundle.packaging.packaging_cost
    return CostBreakdown(per_chiplet, bundle.packaging.packaging_cost, total)


def perf_report(bundle: DesignBundle, with_edges: bool = False) -> proxy.PerfReport:
    """Full performance report: proxies plus the area/power/cost sections."""
    graph = proxy.build_ici_graph(bundle)
    latency, flows, throughput, bottleneck = proxy.evaluate_proxies(
        graph, bundle.routing_table, bundle.traffic)
    report = proxy.PerfReport(avg_latency_cycles=latency,
                              throughput_units=throughput,
                              bottleneck_edge=bottleneck,
                              area=area_report(bundle),
                              power={"total_power_w": power_report(bundle, graph)},
                              cost=cost_report(bundle).to_json())
    if with_edges:
        report.edge_table = [
            {"link": e.index, "u": e.u, "v": e.v,
             "length_mm": e.length_mm, "weight_cycles": e.weight,
             "bandwidth_wires": (e.bandwidth if math.isfinite(e.bandwidth) else None),
             "flow_units": flows[e.index]}
            for e in graph.edges]
    return report
