"""Automated design-space exploration: expand an experiments file into the
cartesian product of its parameter ranges, materialize and evaluate every
design point, aggregate results, extract Pareto fronts, and compare the
proxies against the cycle-level oracle.

Design points are materialized in memory (the same generators can emit them
as input files through the CLI); evaluation failures become error rows and
never abort a sweep.  Sweeps run on a worker pool with a single writer
appending result rows in combination order.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field, asdict

from . import flitsim, netgen, proxy, reports
from .model import (DesignBundle, IcikitError, LinkLatency, Packaging, SimParams,
                    TechNode, read_json, write_json)
from .validate import validate

EVALUATION_MODES = ("proxy_only", "proxy_plus_sim")

RESULT_COLUMNS = [
    # parameters
    "point", "topology", "rows", "cols", "shg_bits", "traffic_pattern",
    "routing_algorithm", "seed", "chiplet_set", "packaging_set",
    "n_chiplets", "n_links", "max_degree",
    # proxy metrics
    "avg_latency_cycles", "throughput_units", "proxy_rate_flits_node_cycle",
    "bottleneck_link", "chiplet_area_sum_mm2", "interposer_area_mm2",
    "total_power_w", "total_cost",
    # simulator metrics
    "sim_zero_load_latency_cycles", "sim_saturation_rate", "sim_runs",
    # timings
    "proxy_time_s", "sim_latency_time_s", "sim_throughput_time_s",
    # error marker (empty on success)
    "error",
]


@dataclass(slots=True)
class ChipletParams:
    """Knobs of the generated chiplet family (reference setup defaults)."""
    base_area_mm2: float = 74.0
    base_power_w: float = 5.0
    phy_area_overhead_mm2: float = 0.85
    phy_power_overhead_w: float = 0.25
    bump_pitch_mm: float = 0.04
    internal_latency_cycles: float = 3.0
    phy_latency_cycles: float = 12.0
    bump_budget: float = 1.0
    spacing_mm: float = 0.1
    phy_style: str = ""  # empty -> automatic per topology kind


@dataclass(slots=True)
class PackagingParams:
    has_active_interposer: bool = False
    router_latency_cycles: float = 0.0
    link_routing: str = "manhattan"
    link_latency_type: str = "per_mm"
    link_latency_value: float = 0.25
    link_power_per_mm_w: float = 0.0
    interposer_power_w: float = 0.0
    packaging_cost: float = 20.0
    non_data_wires: int = 2

    def to_packaging(self) -> Packaging:
        return Packaging(has_active_interposer=self.has_active_interposer,
                         link_routing=self.link_routing,
                         link_latency=LinkLatency(self.link_latency_type,
                                                  self.link_latency_value),
                         router_latency_cycles=self.router_latency_cycles,
                         link_power_per_mm_w=self.link_power_per_mm_w,
                         interposer_power_w=self.interposer_power_w,
                         packaging_cost=self.packaging_cost,
                         non_data_wires=self.non_data_wires)


@dataclass(slots=True)
class TechParams:
    wafer_diameter_mm: float = 300.0
    wafer_cost: float = 6400.0
    defect_density_per_mm2: float = 0.001
    clustering_parameter: float = 5.0


@dataclass(slots=True)
class Experiment:
    topologies: list[str] = field(default_factory=lambda: ["mesh"])
    grid_sizes: list[tuple[int, int]] = field(default_factory=lambda: [(3, 3)])
    traffic_patterns: list[str] = field(default_factory=lambda: ["uniform"])
    routing_algorithms: list[str] = field(default_factory=lambda: ["lowest_id"])
    seeds: list[int] = field(default_factory=lambda: [0])
    evaluation: str = "proxy_only"
    shg_sweep: bool = False
    chiplet_params: list[ChipletParams] = field(default_factory=lambda: [ChipletParams()])
    packaging_params: list[PackagingParams] = field(default_factory=lambda: [PackagingParams()])
    tech_params: TechParams = field(default_factory=TechParams)
    sim_params: SimParams | None = None
    hotspot_count: int = 4
    hotspot_share: float = 0.5

    def check(self):
        for name in ("topologies", "grid_sizes", "traffic_patterns",
                     "routing_algorithms", "seeds", "chiplet_params",
                     "packaging_params"):
            if not getattr(self, name):
                raise IcikitError(f"experiment range '{name}' is empty")
        if self.evaluation not in EVALUATION_MODES:
            raise IcikitError(f"evaluation must be one of {EVALUATION_MODES}")
        if self.shg_sweep and any(t != "shg" for t in self.topologies):
            raise IcikitError("shg_sweep applies to the 'shg' topology kind only")
        for kind in self.topologies:
            if kind not in netgen.TOPOLOGY_KINDS:
                raise IcikitError(f"unknown topology kind '{kind}'")
        for pattern in self.traffic_patterns:
            if pattern not in netgen.TRAFFIC_PATTERNS:
                raise IcikitError(f"unknown traffic pattern '{pattern}'")
        for algorithm in self.routing_algorithms:
            if algorithm not in netgen.ROUTING_ALGORITHMS:
                raise IcikitError(f"unknown routing algorithm '{algorithm}'")


def _dataclass_from(cls, overrides, where):
    obj = cls()
    known = {f for f in obj.__dataclass_fields__}  # type: ignore[attr-defined]
    for key, value in overrides.items():
        if key not in known:
            raise IcikitError(f"{where}: unknown field '{key}'")
        setattr(obj, key, value)
    return obj


def load_experiment(path) -> Experiment:
    doc = read_json(path)
    known = {"topologies", "grid_sizes", "traffic_patterns", "routing_algorithms",
             "seeds", "evaluation", "shg_sweep", "chiplet_params",
             "packaging_params", "tech_params", "sim_params",
             "hotspot_count", "hotspot_share"}
    unknown = set(doc) - known
    if unknown:
        raise IcikitError(f"{path}: unknown experiment field '{sorted(unknown)[0]}'")
    exp = Experiment()
    for name in ("topologies", "traffic_patterns", "routing_algorithms",
                 "seeds", "evaluation", "shg_sweep", "hotspot_count",
                 "hotspot_share"):
        if name in doc:
            setattr(exp, name, doc[name])
    if "grid_sizes" in doc:
        exp.grid_sizes = [tuple(sz) for sz in doc["grid_sizes"]]
    if "chiplet_params" in doc:
        exp.chiplet_params = [_dataclass_from(ChipletParams, d, "chiplet_params")
                              for d in doc["chiplet_params"]]
    if "packaging_params" in doc:
        exp.packaging_params = [_dataclass_from(PackagingParams, d, "packaging_params")
                                for d in doc["packaging_params"]]
    if "tech_params" in doc:
        exp.tech_params = _dataclass_from(TechParams, doc["tech_params"], "tech_params")
    if "sim_params" in doc:
        exp.sim_params = _dataclass_from(SimParams, doc["sim_params"], "sim_params")
    exp.check()
    return exp


# ---------------------------------------------------------------------------
# Design point materialization


@dataclass(slots=True)
class DesignPoint:
    index: int
    topology: str
    rows: int
    cols: int
    shg_bits: str  # "" for non-shg kinds
    traffic_pattern: str
    routing_algorithm: str
    seed: int
    chiplet_set: int
    packaging_set: int


def expand_points(exp: Experiment) -> list[DesignPoint]:
    exp.check()
    points = []
    index = 0
    for kind, size, pattern, ci, pi, algorithm, seed in itertools.product(
            exp.topologies, range(len(exp.grid_sizes)), exp.traffic_patterns,
            range(len(exp.chiplet_params)), range(len(exp.packaging_params)),
            exp.routing_algorithms, exp.seeds):
        rows, cols = exp.grid_sizes[size]
        if kind == "shg" and exp.shg_sweep:
            n_bits = netgen.shg_bit_count(rows, cols)
            for value in range(2 ** n_bits):
                bits = format(value, f"0{n_bits}b")
                points.append(DesignPoint(index, kind, rows, cols, bits, pattern,
                                          algorithm, seed, ci, pi))
                index += 1
        else:
            bits = "1" * netgen.shg_bit_count(rows, cols) if kind == "shg" else ""
            points.append(DesignPoint(index, kind, rows, cols, bits, pattern,
                                      algorithm, seed, ci, pi))
            index += 1
    return points


def materialize_point(exp: Experiment, point: DesignPoint) -> DesignBundle:
    """Generate every input for one design point and assemble the bundle."""
    cp = exp.chiplet_params[point.chiplet_set]
    pp = exp.packaging_params[point.packaging_set]
    if point.topology == "shg":
        topology = netgen.generate_shg(point.rows, point.cols,
                                       [int(b) for b in point.shg_bits])
    else:
        topology = netgen.generate_topology(point.topology, point.rows, point.cols)
    n = point.rows * point.cols
    degrees = netgen.topology_degrees(topology, n)
    max_degree = max(degrees)
    style = cp.phy_style or netgen.select_phy_style(point.topology, max_degree)
    # One chiplet variant per distinct PHY count: the topology decides how
    # many PHYs each position needs.
    library = {}
    for degree in sorted(set(degrees)):
        name = f"c{degree}"
        library[name] = netgen.generate_chiplet(
            cp.base_area_mm2, cp.base_power_w, degree,
            cp.phy_area_overhead_mm2, cp.phy_power_overhead_w, style,
            cp.bump_pitch_mm, cp.internal_latency_cycles, cp.phy_latency_cycles,
            bump_budget=cp.bump_budget, name=name)
    names = [f"c{degree}" for degree in degrees]
    pitch_chiplet = library[f"c{max_degree}"]
    placement_kind = "hex" if point.topology == "hexamesh" else "grid"
    placement = netgen.generate_placement(placement_kind, point.rows, point.cols,
                                          pitch_chiplet, cp.spacing_mm, names)
    routing_table = netgen.generate_routing_table(topology, n,
                                                  point.routing_algorithm,
                                                  point.seed)
    traffic = netgen.generate_traffic(point.traffic_pattern, point.rows,
                                      point.cols, point.seed,
                                      exp.hotspot_count, exp.hotspot_share)
    tech = TechNode("default", exp.tech_params.wafer_diameter_mm,
                    exp.tech_params.wafer_cost,
                    exp.tech_params.defect_density_per_mm2,
                    exp.tech_params.clustering_parameter)
    return DesignBundle(chiplets=library,
                        placement=placement,
                        topology=topology,
                        packaging=pp.to_packaging(),
                        routing_table=routing_table,
                        traffic=traffic,
                        tech_nodes={"default": tech},
                        tech_assignment={name: "default" for name in library},
                        sim_params=exp.sim_params)


def evaluate_point(exp: Experiment, point: DesignPoint) -> dict:
    """One result row: generate, validate, evaluate proxies and reports, and
    optionally run the cycle-level oracle."""
    row = {c: "" for c in RESULT_COLUMNS}
    row.update(point=point.index, topology=point.topology, rows=point.rows,
               cols=point.cols, shg_bits=point.shg_bits,
               traffic_pattern=point.traffic_pattern,
               routing_algorithm=point.routing_algorithm, seed=point.seed,
               chiplet_set=point.chiplet_set, packaging_set=point.packaging_set)
    try:
        bundle = materialize_point(exp, point)
        # Structural validation only: the proxies' own loop guard covers the
        # per-pair routing walk at a fraction of the cost.
        violations = validate(bundle, structural_only=True)
        if violations:
            raise IcikitError(f"generated design invalid: {violations[0]}")
        degrees = netgen.topology_degrees(bundle.topology, bundle.n_chiplets)
        row.update(n_chiplets=bundle.n_chiplets,
                   n_links=len(bundle.topology.links),
                   max_degree=max(degrees))

        start = time.perf_counter()
        graph = proxy.build_ici_graph(bundle)
        latency, flows, throughput, bottleneck = proxy.evaluate_proxies(
            graph, bundle.routing_table, bundle.traffic)
        proxy_time = max(time.perf_counter() - start, 1e-9)
        rate = proxy.normalized_throughput_rate(graph, throughput, bottleneck)
        area = reports.area_report(bundle)
        power = reports.power_report(bundle, graph)
        cost = reports.cost_report(bundle)
        row.update(avg_latency_cycles=latency, throughput_units=throughput,
                   proxy_rate_flits_node_cycle=rate, bottleneck_link=bottleneck,
                   chiplet_area_sum_mm2=area["chiplet_area_sum_mm2"],
                   interposer_area_mm2=area["interposer_area_mm2"],
                   total_power_w=power, total_cost=cost.total_cost,
                   proxy_time_s=proxy_time)

        if exp.evaluation == "proxy_plus_sim":
            start = time.perf_counter()
            zero_load = flitsim.zero_load_latency(bundle, None, bundle.traffic,
                                                  exp.sim_params)
            sim_latency_time = max(time.perf_counter() - start, 1e-9)
            start = time.perf_counter()
            search = flitsim.saturation_throughput(bundle, None, bundle.traffic,
                                                   exp.sim_params)
            sim_throughput_time = max(time.perf_counter() - start, 1e-9)
            row.update(sim_zero_load_latency_cycles=zero_load,
                       sim_saturation_rate=search.rate,
                       sim_runs=len(search.attempted_percent),
                       sim_latency_time_s=sim_latency_time,
                       sim_throughput_time_s=sim_throughput_time)
    except Exception as exc:  # error rows must never abort the sweep
        row["error"] = str(exc)
    return row


def _worker(args):
    exp, point = args
    return evaluate_point(exp, point)


def run_experiments(exp: Experiment, output_dir, workers: int | None = None,
                    progress=None) -> list[dict]:
    """Evaluate every combination; write results.csv and summary.json."""
    os.makedirs(output_dir, exist_ok=True)
    points = expand_points(exp)
    rows = []
    csv_path = os.path.join(output_dir, "results.csv")
    if workers is None:
        workers = min(multiprocessing.cpu_count(), len(points)) or 1
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        if workers <= 1 or len(points) <= 1:
            iterator = (evaluate_point(exp, p) for p in points)
            for done, row in enumerate(iterator, 1):
                rows.append(row)
                writer.writerow(row)
                if progress:
                    progress(done, len(points))
        else:
            chunk = max(1, min(64, len(points) // (workers * 8) or 1))
            with multiprocessing.Pool(workers) as pool:
                for done, row in enumerate(
                        pool.imap(_worker, ((exp, p) for p in points), chunk), 1):
                    rows.append(row)
                    writer.writerow(row)
                    if progress:
                        progress(done, len(points))
    write_json(os.path.join(output_dir, "summary.json"), summarize(rows))
    return rows


def summarize(rows: list[dict]) -> dict:
    good = [r for r in rows if not r.get("error")]
    summary = {"points": len(rows), "errors": len(rows) - len(good)}
    if good:
        lat = [float(r["avg_latency_cycles"]) for r in good]
        thr = [float(r["throughput_units"]) for r in good]
        summary["avg_latency_cycles"] = sum(lat) / len(lat)
        summary["avg_throughput_units"] = sum(thr) / len(thr)
        per_pattern = {}
        for r in good:
            per_pattern.setdefault(r["traffic_pattern"], []).append(
                float(r["avg_latency_cycles"]))
        summary["avg_latency_by_pattern"] = {
            k: sum(v) / len(v) for k, v in sorted(per_pattern.items())}
        try:
            front = pareto_front(good, max_area_overhead=None)
            summary["pareto_points"] = sorted(int(r["point"]) for r in front)
        except IcikitError:
            pass
    return summary


# ---------------------------------------------------------------------------
# Pareto extraction


def pareto_front(rows: list[dict], max_area_overhead: float | None,
                 baseline_index: int | None = None) -> list[dict]:
    """Rows within the area budget that no other feasible row dominates
    (lower latency and higher throughput, strict in at least one).

    Area overhead is measured on the chiplet-area sum against a baseline row:
    by position in `rows` when given, otherwise the smallest-area row.
    """
    good = [r for r in rows if not r.get("error")]
    if not good:
        raise IcikitError("no evaluable rows")
    areas = [float(r["chiplet_area_sum_mm2"]) for r in good]
    if baseline_index is None:
        base_area = min(areas)
    else:
        if not 0 <= baseline_index < len(rows):
            raise IcikitError(f"baseline index {baseline_index} out of range")
        base = rows[baseline_index]
        if base.get("error"):
            raise IcikitError("baseline row is an error row")
        base_area = float(base["chiplet_area_sum_mm2"])
    if base_area <= 0:
        raise IcikitError("baseline chiplet area must be positive")
    if max_area_overhead is None:
        feasible = good
    else:
        feasible = [r for r, a in zip(good, areas)
                    if a / base_area - 1.0 <= max_area_overhead + 1e-12]
    front = []
    for r in feasible:
        lat_r = float(r["avg_latency_cycles"])
        thr_r = float(r["throughput_units"])
        dominated = False
        for other in feasible:
            if other is r:
                continue
            lat_o = float(other["avg_latency_cycles"])
            thr_o = float(other["throughput_units"])
            if lat_o <= lat_r and thr_o >= thr_r and (lat_o < lat_r or thr_o > thr_r):
                dominated = True
                break
        if not dominated:
            front.append(r)
    return front


# ---------------------------------------------------------------------------
# Proxy-vs-oracle comparison


def compare_proxy_vs_sim(rows: list[dict]) -> dict:
    """Relative errors and speedups per row plus averages per traffic pattern.

    Rows whose simulator fields are zero or missing are flagged and excluded
    from the averages.
    """
    table = []
    flagged = 0
    for r in rows:
        if r.get("error"):
            flagged += 1
            continue
        try:
            l_proxy = float(r["avg_latency_cycles"])
            l_sim = float(r["sim_zero_load_latency_cycles"])
            r_proxy = float(r["proxy_rate_flits_node_cycle"])
            r_sim = float(r["sim_saturation_rate"])
            t_proxy = float(r["proxy_time_s"])
            t_lat = float(r["sim_latency_time_s"])
            t_thr = float(r["sim_throughput_time_s"])
        except (KeyError, TypeError, ValueError):
            flagged += 1
            continue
        if l_sim <= 0 or r_sim <= 0 or t_proxy <= 0:
            flagged += 1
            continue
        table.append({
            "point": r.get("point", ""),
            "topology": r.get("topology", ""),
            "rows": r.get("rows", ""), "cols": r.get("cols", ""),
            "traffic_pattern": r.get("traffic_pattern", ""),
            "latency_rel_error": abs(l_proxy - l_sim) / l_sim,
            "throughput_rel_error": abs(r_proxy - r_sim) / r_sim,
            "latency_speedup": t_lat / t_proxy,
            "throughput_speedup": t_thr / t_proxy,
        })
    if not table:
        raise IcikitError("no rows carry both proxy and simulator results")
    per_pattern = {}
    for entry in table:
        per_pattern.setdefault(entry["traffic_pattern"], []).append(entry)
    averages = {}
    for pattern, entries in sorted(per_pattern.items()):
        averages[pattern] = {
            key: sum(e[key] for e in entries) / len(entries)
            for key in ("latency_rel_error", "throughput_rel_error",
                        "latency_speedup", "throughput_speedup")}
    overall = {key: sum(e[key] for e in table) / len(table)
               for key in ("latency_rel_error", "throughput_rel_error",
                           "latency_speedup", "throughput_speedup")}
    return {"rows": table, "per_pattern": averages, "overall": overall,
            "excluded_rows": flagged}


def read_results_csv(path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise IcikitError(f"cannot read results file {path}: {exc}") from exc
