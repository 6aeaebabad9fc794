"""Declarative design model: input types, strict JSON loading, and serialization.

A design is split across one JSON document per input kind (chiplets, placement,
topology, packaging, routing_table, traffic, technology, optionally trace and
sim_params); the design file maps each kind to a relative path.  Loading is
strict: unknown fields and duplicate keys are hard parse errors, so that typos
in generated sweep inputs cannot silently skew results.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


ROTATIONS = (0, 90, 180, 270)
LINK_ROUTINGS = ("manhattan", "direct")
ENDPOINT_KINDS = ("chiplet", "interposer_router")

# Input kinds a design file may reference; trace and sim_params are optional.
DESIGN_KINDS = ("chiplets", "placement", "topology", "packaging",
                "routing_table", "traffic", "technology", "trace", "sim_params")
REQUIRED_KINDS = DESIGN_KINDS[:7]


class IcikitError(Exception):
    """Base class for all toolchain errors."""


class ParseError(IcikitError):
    """Malformed input document; carries file and location context."""

    def __init__(self, where, message):
        self.where = where
        super().__init__(f"{where}: {message}")


class RoutingError(IcikitError):
    """Routing table cannot deliver a packet (missing entry or loop)."""


@dataclass(slots=True)
class PhyDef:
    """One PHY of a chiplet: position relative to the unrotated lower-left
    corner, and the fraction of the chiplet's bump area serving its link."""
    x_mm: float
    y_mm: float
    area_fraction: float


@dataclass(slots=True)
class ChipletDef:
    name: str
    width_mm: float
    height_mm: float
    internal_latency_cycles: float
    phy_latency_cycles: float
    power_w: float
    bump_pitch_mm: float
    phys: list[PhyDef] = field(default_factory=list)
    kind: str = "compute"

    @property
    def area_mm2(self) -> float:
        return self.width_mm * self.height_mm


@dataclass(slots=True)
class PlacedChiplet:
    name: str
    x_mm: float
    y_mm: float
    rotation: int = 0


@dataclass(slots=True)
class InterposerRouter:
    x_mm: float
    y_mm: float


@dataclass(slots=True)
class Placement:
    chiplets: list[PlacedChiplet] = field(default_factory=list)
    interposer_routers: list[InterposerRouter] = field(default_factory=list)


@dataclass(slots=True, frozen=True)
class Endpoint:
    """One side of a link: a chiplet instance (through a PHY) or a router."""
    kind: str
    index: int
    phy: int | None = None


@dataclass(slots=True)
class Link:
    ep1: Endpoint
    ep2: Endpoint


@dataclass(slots=True)
class Topology:
    links: list[Link] = field(default_factory=list)


@dataclass(slots=True)
class LinkLatency:
    """Either a constant latency or a per-mm latency resolved against the
    routed link length."""
    type: str  # "constant" | "per_mm"
    value: float

    def cycles(self, length_mm: float) -> float:
        if self.type == "constant":
            return self.value
        return self.value * length_mm


@dataclass(slots=True)
class Packaging:
    has_active_interposer: bool
    link_routing: str
    link_latency: LinkLatency
    router_latency_cycles: float = 0.0
    link_power_per_mm_w: float = 0.0
    interposer_power_w: float = 0.0
    packaging_cost: float = 0.0
    non_data_wires: int = 0


@dataclass(slots=True)
class RoutingTable:
    """Per network node (chiplets first, then interposer routers): mapping
    destination chiplet index -> outgoing link index."""
    tables: list[dict[int, int]] = field(default_factory=list)


@dataclass(slots=True)
class TrafficEntry:
    src: int
    dst: int
    amount: float


@dataclass(slots=True)
class Traffic:
    entries: list[TrafficEntry] = field(default_factory=list)

    @property
    def total(self) -> float:
        return sum(e.amount for e in self.entries)


@dataclass(slots=True)
class TraceMessage:
    id: int
    earliest_injection_cycle: int
    src: int
    dst: int
    size_flits: int
    deps: list[int] = field(default_factory=list)


@dataclass(slots=True)
class Trace:
    messages: list[TraceMessage] = field(default_factory=list)


@dataclass(slots=True)
class TechNode:
    name: str
    wafer_diameter_mm: float
    wafer_cost: float
    defect_density_per_mm2: float
    clustering_parameter: float


@dataclass(slots=True)
class SimParams:
    """Cycle-level simulator knobs; defaults follow the reference setup of
    four VCs with 16-flit buffers and a node-count-scaled cycle budget."""
    vcs_per_port: int = 4
    buffer_flits_per_vc: int = 16
    packet_size_flits: int = 1
    warmup_cycles: int = 0        # 0 -> auto: 500 + 50 * nodes
    measurement_cycles: int = 0   # 0 -> auto: 1000 + 100 * nodes
    drain_cycle_limit: int = 0    # 0 -> auto: 20x measurement
    latency_saturation_factor: float = 10.0
    seed: int = 0
    debug_checks: bool = False


@dataclass(slots=True)
class DesignBundle:
    """One fully resolved design point."""
    chiplets: dict[str, ChipletDef]
    placement: Placement
    topology: Topology
    packaging: Packaging
    routing_table: RoutingTable
    traffic: Traffic
    tech_nodes: dict[str, TechNode]
    tech_assignment: dict[str, str]
    trace: Trace | None = None
    sim_params: SimParams | None = None

    @property
    def n_chiplets(self) -> int:
        return len(self.placement.chiplets)

    @property
    def n_nodes(self) -> int:
        return len(self.placement.chiplets) + len(self.placement.interposer_routers)

    def chiplet_at(self, index: int) -> ChipletDef:
        return self.chiplets[self.placement.chiplets[index].name]


# ---------------------------------------------------------------------------
# Strict JSON reading


def _reject_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise ValueError(f"duplicate key '{key}'")
        obj[key] = value
    return obj


def read_json(path):
    """Read one JSON document, rejecting duplicate object keys."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh, object_pairs_hook=_reject_duplicate_keys)
    except OSError as exc:
        raise ParseError(path, f"cannot read file: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise ParseError(path, str(exc)) from exc


def write_json(path, document):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=1, sort_keys=True)
        fh.write("\n")


class _Ctx:
    """Location tracker so parse errors name file, path, and field."""

    def __init__(self, where):
        self.where = where

    def at(self, part) -> "_Ctx":
        return _Ctx(f"{self.where}.{part}" if "." in part or part[:1] != "[" else self.where + part)

    def sub(self, part) -> "_Ctx":
        return _Ctx(f"{self.where}{part}")

    def fail(self, message):
        raise ParseError(self.where, message)


def _need_obj(data, ctx, known):
    if not isinstance(data, dict):
        ctx.fail(f"expected object, got {type(data).__name__}")
    unknown = set(data) - set(known)
    if unknown:
        ctx.fail(f"unknown field '{sorted(unknown)[0]}'")
    return data


def _get(data, name, ctx, typ, default=_Ctx):  # _Ctx doubles as a "no default" marker
    if name not in data:
        if default is not _Ctx:
            return default
        ctx.fail(f"missing field '{name}'")
    value = data[name]
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            ctx.fail(f"field '{name}' must be a number")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            ctx.fail(f"field '{name}' must be an integer")
        return value
    if not isinstance(value, typ):
        ctx.fail(f"field '{name}' must be {typ.__name__}")
    return value


# ---------------------------------------------------------------------------
# Per-kind parsers


def parse_chiplets(doc, ctx) -> dict[str, ChipletDef]:
    _need_obj(doc, ctx, ["chiplets"])
    raw = _get(doc, "chiplets", ctx, dict)
    library = {}
    for name, body in raw.items():
        c = ctx.sub(f".chiplets['{name}']")
        _need_obj(body, c, ["width_mm", "height_mm", "internal_latency_cycles",
                            "phy_latency_cycles", "power_w", "bump_pitch_mm",
                            "phys", "kind"])
        phys = []
        for i, p in enumerate(_get(body, "phys", c, list)):
            pc = c.sub(f".phys[{i}]")
            _need_obj(p, pc, ["x_mm", "y_mm", "area_fraction"])
            phys.append(PhyDef(_get(p, "x_mm", pc, float),
                               _get(p, "y_mm", pc, float),
                               _get(p, "area_fraction", pc, float)))
        library[name] = ChipletDef(
            name=name,
            width_mm=_get(body, "width_mm", c, float),
            height_mm=_get(body, "height_mm", c, float),
            internal_latency_cycles=_get(body, "internal_latency_cycles", c, float),
            phy_latency_cycles=_get(body, "phy_latency_cycles", c, float),
            power_w=_get(body, "power_w", c, float),
            bump_pitch_mm=_get(body, "bump_pitch_mm", c, float),
            phys=phys,
            kind=_get(body, "kind", c, str, "compute"),
        )
    return library


def parse_placement(doc, ctx) -> Placement:
    _need_obj(doc, ctx, ["chiplets", "interposer_routers"])
    instances = []
    for i, inst in enumerate(_get(doc, "chiplets", ctx, list)):
        c = ctx.sub(f".chiplets[{i}]")
        _need_obj(inst, c, ["name", "x_mm", "y_mm", "rotation"])
        rot = _get(inst, "rotation", c, int, 0)
        if rot not in ROTATIONS:
            c.fail(f"rotation must be one of {ROTATIONS}, got {rot}")
        instances.append(PlacedChiplet(_get(inst, "name", c, str),
                                       _get(inst, "x_mm", c, float),
                                       _get(inst, "y_mm", c, float), rot))
    routers = []
    for i, r in enumerate(_get(doc, "interposer_routers", ctx, list, [])):
        c = ctx.sub(f".interposer_routers[{i}]")
        _need_obj(r, c, ["x_mm", "y_mm"])
        routers.append(InterposerRouter(_get(r, "x_mm", c, float),
                                        _get(r, "y_mm", c, float)))
    return Placement(instances, routers)


def _parse_endpoint(raw, ctx) -> Endpoint:
    _need_obj(raw, ctx, ["type", "index", "phy"])
    kind = _get(raw, "type", ctx, str)
    if kind not in ENDPOINT_KINDS:
        ctx.fail(f"endpoint type must be one of {ENDPOINT_KINDS}, got '{kind}'")
    phy = _get(raw, "phy", ctx, int, None)
    if kind == "chiplet" and phy is None:
        ctx.fail("chiplet endpoint requires a 'phy' index")
    if kind == "interposer_router" and phy is not None:
        ctx.fail("interposer_router endpoint must not carry a 'phy' index")
    return Endpoint(kind, _get(raw, "index", ctx, int), phy)


def parse_topology(doc, ctx) -> Topology:
    _need_obj(doc, ctx, ["links"])
    links = []
    for i, pair in enumerate(_get(doc, "links", ctx, list)):
        c = ctx.sub(f".links[{i}]")
        if not isinstance(pair, list) or len(pair) != 2:
            c.fail("each link must be a pair of endpoints")
        links.append(Link(_parse_endpoint(pair[0], c.sub("[0]")),
                          _parse_endpoint(pair[1], c.sub("[1]"))))
    return Topology(links)


def parse_packaging(doc, ctx) -> Packaging:
    _need_obj(doc, ctx, ["has_active_interposer", "router_latency_cycles",
                         "link_routing", "link_latency", "link_power_per_mm_w",
                         "interposer_power_w", "packaging_cost", "non_data_wires"])
    routing = _get(doc, "link_routing", ctx, str)
    if routing not in LINK_ROUTINGS:
        ctx.fail(f"link_routing must be one of {LINK_ROUTINGS}, got '{routing}'")
    raw_lat = _get(doc, "link_latency", ctx, dict)
    c = ctx.sub(".link_latency")
    _need_obj(raw_lat, c, ["type", "cycles", "cycles_per_mm"])
    lat_type = _get(raw_lat, "type", c, str)
    if lat_type == "constant":
        latency = LinkLatency("constant", _get(raw_lat, "cycles", c, float))
    elif lat_type == "per_mm":
        latency = LinkLatency("per_mm", _get(raw_lat, "cycles_per_mm", c, float))
    else:
        c.fail(f"link_latency type must be 'constant' or 'per_mm', got '{lat_type}'")
    return Packaging(
        has_active_interposer=_get(doc, "has_active_interposer", ctx, bool),
        link_routing=routing,
        link_latency=latency,
        router_latency_cycles=_get(doc, "router_latency_cycles", ctx, float, 0.0),
        link_power_per_mm_w=_get(doc, "link_power_per_mm_w", ctx, float, 0.0),
        interposer_power_w=_get(doc, "interposer_power_w", ctx, float, 0.0),
        packaging_cost=_get(doc, "packaging_cost", ctx, float, 0.0),
        non_data_wires=_get(doc, "non_data_wires", ctx, int, 0),
    )


def parse_routing_table(doc, ctx) -> RoutingTable:
    _need_obj(doc, ctx, ["tables"])
    tables = []
    for i, raw in enumerate(_get(doc, "tables", ctx, list)):
        c = ctx.sub(f".tables[{i}]")
        if not isinstance(raw, dict):
            c.fail("per-node table must be an object mapping destination -> link index")
        table = {}
        for key, value in raw.items():
            try:
                dst = int(key)
            except ValueError:
                c.fail(f"destination key '{key}' is not an integer")
            if isinstance(value, bool) or not isinstance(value, int):
                c.fail(f"link index for destination {key} must be an integer")
            table[dst] = value
        tables.append(table)
    return RoutingTable(tables)


def parse_traffic(doc, ctx) -> Traffic:
    _need_obj(doc, ctx, ["entries"])
    entries = []
    for i, raw in enumerate(_get(doc, "entries", ctx, list)):
        c = ctx.sub(f".entries[{i}]")
        _need_obj(raw, c, ["src", "dst", "amount"])
        entries.append(TrafficEntry(_get(raw, "src", c, int),
                                    _get(raw, "dst", c, int),
                                    _get(raw, "amount", c, float)))
    return Traffic(entries)


def parse_trace(doc, ctx) -> Trace:
    _need_obj(doc, ctx, ["messages"])
    messages = []
    for i, raw in enumerate(_get(doc, "messages", ctx, list)):
        c = ctx.sub(f".messages[{i}]")
        _need_obj(raw, c, ["id", "earliest_injection_cycle", "src", "dst",
                           "size_flits", "deps"])
        deps = _get(raw, "deps", c, list, [])
        if not all(isinstance(d, int) and not isinstance(d, bool) for d in deps):
            c.fail("deps must be a list of message ids")
        messages.append(TraceMessage(
            id=_get(raw, "id", c, int),
            earliest_injection_cycle=_get(raw, "earliest_injection_cycle", c, int, 0),
            src=_get(raw, "src", c, int),
            dst=_get(raw, "dst", c, int),
            size_flits=_get(raw, "size_flits", c, int, 1),
            deps=list(deps),
        ))
    return Trace(messages)


def parse_technology(doc, ctx) -> tuple[dict[str, TechNode], dict[str, str]]:
    _need_obj(doc, ctx, ["nodes", "assignment"])
    nodes = {}
    for name, body in _get(doc, "nodes", ctx, dict).items():
        c = ctx.sub(f".nodes['{name}']")
        _need_obj(body, c, ["wafer_diameter_mm", "wafer_cost",
                            "defect_density_per_mm2", "clustering_parameter"])
        nodes[name] = TechNode(
            name=name,
            wafer_diameter_mm=_get(body, "wafer_diameter_mm", c, float),
            wafer_cost=_get(body, "wafer_cost", c, float),
            defect_density_per_mm2=_get(body, "defect_density_per_mm2", c, float),
            clustering_parameter=_get(body, "clustering_parameter", c, float),
        )
    assignment = {}
    for name, node in _get(doc, "assignment", ctx, dict).items():
        if not isinstance(node, str):
            ctx.sub(".assignment").fail(f"technology for '{name}' must be a node name")
        assignment[name] = node
    return nodes, assignment


def parse_sim_params(doc, ctx) -> SimParams:
    defaults = SimParams()
    _need_obj(doc, ctx, ["vcs_per_port", "buffer_flits_per_vc", "packet_size_flits",
                         "warmup_cycles", "measurement_cycles", "drain_cycle_limit",
                         "latency_saturation_factor", "seed", "debug_checks"])
    return SimParams(
        vcs_per_port=_get(doc, "vcs_per_port", ctx, int, defaults.vcs_per_port),
        buffer_flits_per_vc=_get(doc, "buffer_flits_per_vc", ctx, int, defaults.buffer_flits_per_vc),
        packet_size_flits=_get(doc, "packet_size_flits", ctx, int, defaults.packet_size_flits),
        warmup_cycles=_get(doc, "warmup_cycles", ctx, int, defaults.warmup_cycles),
        measurement_cycles=_get(doc, "measurement_cycles", ctx, int, defaults.measurement_cycles),
        drain_cycle_limit=_get(doc, "drain_cycle_limit", ctx, int, defaults.drain_cycle_limit),
        latency_saturation_factor=_get(doc, "latency_saturation_factor", ctx, float,
                                       defaults.latency_saturation_factor),
        seed=_get(doc, "seed", ctx, int, defaults.seed),
        debug_checks=_get(doc, "debug_checks", ctx, bool, defaults.debug_checks),
    )


def load_design(design_path) -> DesignBundle:
    """Load a design file and every input document it references."""
    doc = read_json(design_path)
    ctx = _Ctx(str(design_path))
    _need_obj(doc, ctx, DESIGN_KINDS)
    base = os.path.dirname(os.path.abspath(design_path))
    paths = {}
    for kind in DESIGN_KINDS:
        if kind in doc:
            raw = _get(doc, kind, ctx, str)
            paths[kind] = raw if os.path.isabs(raw) else os.path.join(base, raw)
        elif kind in REQUIRED_KINDS:
            ctx.fail(f"missing field '{kind}'")

    def load(kind, parser):
        path = paths.get(kind)
        if path is None:
            return None
        return parser(read_json(path), _Ctx(path))

    tech_nodes, tech_assignment = load("technology", parse_technology)
    return DesignBundle(
        chiplets=load("chiplets", parse_chiplets),
        placement=load("placement", parse_placement),
        topology=load("topology", parse_topology),
        packaging=load("packaging", parse_packaging),
        routing_table=load("routing_table", parse_routing_table),
        traffic=load("traffic", parse_traffic),
        tech_nodes=tech_nodes,
        tech_assignment=tech_assignment,
        trace=load("trace", parse_trace),
        sim_params=load("sim_params", parse_sim_params),
    )


# ---------------------------------------------------------------------------
# Serialization (inverse of the parsers; round-trips field-for-field)


def chiplets_to_json(library: dict[str, ChipletDef]) -> dict:
    return {"chiplets": {
        name: {
            "width_mm": c.width_mm, "height_mm": c.height_mm,
            "internal_latency_cycles": c.internal_latency_cycles,
            "phy_latency_cycles": c.phy_latency_cycles,
            "power_w": c.power_w, "bump_pitch_mm": c.bump_pitch_mm,
            "kind": c.kind,
            "phys": [{"x_mm": p.x_mm, "y_mm": p.y_mm, "area_fraction": p.area_fraction}
                     for p in c.phys],
        } for name, c in library.items()}}


def placement_to_json(p: Placement) -> dict:
    return {"chiplets": [{"name": i.name, "x_mm": i.x_mm, "y_mm": i.y_mm,
                          "rotation": i.rotation} for i in p.chiplets],
            "interposer_routers": [{"x_mm": r.x_mm, "y_mm": r.y_mm}
                                   for r in p.interposer_routers]}


def _endpoint_to_json(e: Endpoint) -> dict:
    out = {"type": e.kind, "index": e.index}
    if e.phy is not None:
        out["phy"] = e.phy
    return out


def topology_to_json(t: Topology) -> dict:
    return {"links": [[_endpoint_to_json(l.ep1), _endpoint_to_json(l.ep2)]
                      for l in t.links]}


def packaging_to_json(p: Packaging) -> dict:
    if p.link_latency.type == "constant":
        latency = {"type": "constant", "cycles": p.link_latency.value}
    else:
        latency = {"type": "per_mm", "cycles_per_mm": p.link_latency.value}
    return {"has_active_interposer": p.has_active_interposer,
            "router_latency_cycles": p.router_latency_cycles,
            "link_routing": p.link_routing,
            "link_latency": latency,
            "link_power_per_mm_w": p.link_power_per_mm_w,
            "interposer_power_w": p.interposer_power_w,
            "packaging_cost": p.packaging_cost,
            "non_data_wires": p.non_data_wires}


def routing_table_to_json(rt: RoutingTable) -> dict:
    return {"tables": [{str(dst): link for dst, link in sorted(t.items())}
                       for t in rt.tables]}


def traffic_to_json(t: Traffic) -> dict:
    return {"entries": [{"src": e.src, "dst": e.dst, "amount": e.amount}
                        for e in t.entries]}


def trace_to_json(t: Trace) -> dict:
    return {"messages": [{"id": m.id,
                          "earliest_injection_cycle": m.earliest_injection_cycle,
                          "src": m.src, "dst": m.dst, "size_flits": m.size_flits,
                          "deps": list(m.deps)} for m in t.messages]}


def technology_to_json(nodes: dict[str, TechNode], assignment: dict[str, str]) -> dict:
    return {"nodes": {name: {"wafer_diameter_mm": n.wafer_diameter_mm,
                             "wafer_cost": n.wafer_cost,
                             "defect_density_per_mm2": n.defect_density_per_mm2,
                             "clustering_parameter": n.clustering_parameter}
                      for name, n in nodes.items()},
            "assignment": dict(assignment)}


def sim_params_to_json(p: SimParams) -> dict:
    return {"vcs_per_port": p.vcs_per_port,
            "buffer_flits_per_vc": p.buffer_flits_per_vc,
            "packet_size_flits": p.packet_size_flits,
            "warmup_cycles": p.warmup_cycles,
            "measurement_cycles": p.measurement_cycles,
            "drain_cycle_limit": p.drain_cycle_limit,
            "latency_saturation_factor": p.latency_saturation_factor,
            "seed": p.seed,
            "debug_checks": p.debug_checks}


def save_design(bundle: DesignBundle, out_dir, stem="design") -> str:
    """Write one file per input kind plus the design file; returns its path."""
    os.makedirs(out_dir, exist_ok=True)
    mapping = {}

    def emit(kind, document):
        filename = f"{stem}_{kind}.json"
        write_json(os.path.join(out_dir, filename), document)
        mapping[kind] = filename

    emit("chiplets", chiplets_to_json(bundle.chiplets))
    emit("placement", placement_to_json(bundle.placement))
    emit("topology", topology_to_json(bundle.topology))
    emit("packaging", packaging_to_json(bundle.packaging))
    emit("routing_table", routing_table_to_json(bundle.routing_table))
    emit("traffic", traffic_to_json(bundle.traffic))
    emit("technology", technology_to_json(bundle.tech_nodes, bundle.tech_assignment))
    if bundle.trace is not None:
        emit("trace", trace_to_json(bundle.trace))
    if bundle.sim_params is not None:
        emit("sim_params", sim_params_to_json(bundle.sim_params))
    design_path = os.path.join(out_dir, f"{stem}.json")
    write_json(design_path, mapping)
    return design_path
