"""Compact cycle-level, flit-level network simulator used as the in-repo
accuracy oracle.

Every network node is an input-queued router with per-port virtual channels,
credit-based flow control, round-robin VC allocation, and single-iteration
round-robin switch allocation.  A head flit occupies a router for
max(4, node weight) cycles: the four pipeline stages (routing, VC allocation,
switch allocation, crossbar traversal) at one cycle each, stretched by the
node's vertex-weight extra cycles when the chiplet-internal or router latency
exceeds the pipeline depth.  Link traversal costs the PHY latencies of chiplet
endpoints plus the link latency rounded up to whole cycles, mirroring the
proxy's edge-weight rule.  At the destination the flit leaves through the
ejection port and the packet finishes after the node's own weight in consume
cycles, so one isolated packet measures exactly

    sum over hops (max(4, w(node)) + phy + ceil(link)) + w(destination).

Links are half-duplex: both directions share one flit per cycle, matching the
undirected bandwidth and flow semantics of the throughput proxy.
"""

from __future__ import annotations

import heapq
import math
import random
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass

from . import proxy
from .model import (DesignBundle, IcikitError, RoutingTable, SimParams, Trace,
                    TraceMessage, Traffic)

_PIPELINE_STAGES = 4

# Packet record indices (lists are measurably faster than objects here).
_SRC, _DST, _SIZE, _CREATED, _MEASURED, _ID, _EJECTED, _DELIVERY = range(8)


class DeadlockError(IcikitError):
    """No flit moved for the watchdog window while buffers were occupied."""

    def __init__(self, cycle, blocked):
        self.cycle = cycle
        self.blocked = blocked
        names = ", ".join(f"(node {n}, port {p}, vc {v})" for n, p, v in blocked[:8])
        more = "" if len(blocked) <= 8 else f" and {len(blocked) - 8} more"
        super().__init__(f"deadlock at cycle {cycle}: blocked VCs {names}{more}")


@dataclass(slots=True)
class SimResult:
    avg_packet_latency_cycles: float
    offered_rate: float
    accepted_rate: float
    delivered_packets: int
    saturated: bool
    makespan_cycles: int = 0
    measured_packets: int = 0


@dataclass(slots=True)
class SyntheticLoad:
    traffic: Traffic
    injection_rate: float  # flits per node per cycle, network average


@dataclass(slots=True)
class TraceLoad:
    trace: Trace


@dataclass(slots=True)
class SaturationSearch:
    rate: float                      # flits/node/cycle; 0.0 when nothing is stable
    attempted_percent: list[float]   # probed injection rates, in percent
    results: list[SimResult]
    warning: str | None = None


def _resolve_params(params: SimParams | None, n_nodes: int) -> SimParams:
    p = params if params is not None else SimParams()
    if p.vcs_per_port < 1 or p.buffer_flits_per_vc < 1 or p.packet_size_flits < 1:
        raise IcikitError("simulator counts must be >= 1")
    if p.packet_size_flits > p.buffer_flits_per_vc:
        raise IcikitError("packet size must not exceed the VC buffer depth")
    if p.latency_saturation_factor <= 1:
        raise IcikitError("latency saturation factor must be > 1")
    warmup = p.warmup_cycles if p.warmup_cycles > 0 else 500 + 50 * n_nodes
    measure = p.measurement_cycles if p.measurement_cycles > 0 else 1000 + 100 * n_nodes
    drain = p.drain_cycle_limit if p.drain_cycle_limit > 0 else 20 * measure
    return SimParams(vcs_per_port=p.vcs_per_port,
                     buffer_flits_per_vc=p.buffer_flits_per_vc,
                     packet_size_flits=p.packet_size_flits,
                     warmup_cycles=warmup,
                     measurement_cycles=measure,
                     drain_cycle_limit=drain,
                     latency_saturation_factor=p.latency_saturation_factor,
                     seed=p.seed,
                     debug_checks=p.debug_checks)


class _Network:
    """Static structure shared by all phases of one simulation run."""

    def __init__(self, bundle: DesignBundle, routing_table: RoutingTable,
                 params: SimParams):
        graph = proxy.build_ici_graph(bundle)
        self.graph = graph
        self.n_nodes = graph.n_nodes
        self.n_chiplets = graph.n_chiplets
        self.tables = routing_table.tables
        self.params = params
        # Node residency (pipeline) and destination consume cycles.
        self.pipe = [max(_PIPELINE_STAGES, math.ceil(w - 1e-9))
                     for w in graph.vertex_weights]
        self.consume = [math.ceil(w - 1e-9) for w in graph.vertex_weights]
        # Integer link delay: PHY latencies plus ceil of the link latency.
        self.edge_delay = [math.ceil(e.link_cycles - 1e-9)
                           + math.ceil(e.phy_cycles - 1e-9)
                           for e in graph.edges]
        self.edge_nodes = [(e.u, e.v) for e in graph.edges]
        # Ports: per node, incident links sorted by link id, plus one local
        # injection port at the end.
        self.ports = [[li for _, li in adj] for adj in graph.adjacency]
        self.port_of = [dict() for _ in range(self.n_nodes)]
        for node, links in enumerate(self.ports):
            for p, li in enumerate(links):
                self.port_of[node][li] = p
        self.inj_port = [len(links) for links in self.ports]
        self.n_ports = [len(links) + 1 for links in self.ports]

    def next_hop(self, node: int, dst: int):
        entry = self.tables[node].get(dst)
        if entry is None:
            raise IcikitError(f"node {node} has no route entry for destination {dst}")
        u, v = self.edge_nodes[entry]
        if node not in (u, v):
            raise IcikitError(f"route entry at node {node} names a non-incident link")
        return entry


class _Run:
    """Mutable state of one simulation plus the per-cycle machinery."""

    def __init__(self, net: _Network, params: SimParams):
        self.net = net
        self.params = params
        V = params.vcs_per_port
        self.V = V
        self.cap = params.buffer_flits_per_vc
        n = net.n_nodes
        self.buffers = [[[deque() for _ in range(V)] for _ in range(net.n_ports[i])]
                        for i in range(n)]
        self.vc_state = [[[None] * V for _ in range(net.n_ports[i])] for i in range(n)]
        self.credits = {}
        self.claims = {}
        for li in range(len(net.edge_nodes)):
            for side in (0, 1):  # side 0 transfers ep1 -> ep2
                self.credits[(li, side)] = [self.cap] * V
                self.claims[(li, side)] = [None] * V
        self.inj_claims = [[None] * V for _ in range(n)]
        self.active = set()        # (node, port, vc) with queued flits
        self.arrivals = {}         # cycle -> [(node, port, vc, flit)]
        self.on_wire = 0
        self.src_queues = [deque() for _ in range(n)]
        self.src_pending_flits = 0
        self.inj_vc_rr = [0] * n
        self.eject_rr = [0] * n
        self.va_rr = {key: 0 for key in self.credits}
        self.sa_rr = [[0] * net.n_ports[i] for i in range(n)]
        self.link_toggle = [0] * len(net.edge_nodes)
        self.cycle = 0
        self.idle_cycles = 0
        self.watchdog_limit = max(10 * net.n_nodes,
                                  4 * (max(net.pipe) + max(net.edge_delay, default=0)))
        self.in_network_flits = 0
        self.created_packets = 0
        self.created_flits = 0
        self.delivered_packets = 0
        self.delivered_flits = 0
        self.deliveries_in_window = 0
        self.win_start = 0
        self.win_end = 0
        self.measured_latencies = []
        self.measured_pending = 0
        self.last_delivery = 0
        self.packet_seq = 0

    def make_packet(self, src, dst, size, measured):
        self.packet_seq += 1
        pkt = [src, dst, size, self.cycle, measured, self.packet_seq, 0, None]
        self.created_packets += 1
        self.created_flits += size
        if measured:
            self.measured_pending += 1
        return pkt

    def enqueue_source(self, pkt):
        self.src_queues[pkt[_SRC]].append(pkt)
        self.src_pending_flits += pkt[_SIZE]

    # -- phase 0: scheduled arrivals --------------------------------------

    def do_arrivals(self):
        batch = self.arrivals.pop(self.cycle, None)
        if not batch:
            return False
        for node, port, vc, flit in batch:
            q = self.buffers[node][port][vc]
            if self.params.debug_checks and len(q) >= self.cap:
                raise IcikitError(f"buffer overflow at node {node} port {port} vc {vc}")
            q.append(flit)
            self.on_wire -= 1
            state = self.vc_state[node][port][vc]
            if state is not None and len(q) == 1:
                state[1] = max(state[1], self.cycle)  # trailing flit may move now
            self.active.add((node, port, vc))
        return True

    # -- phase 1: move packets from source queues into injection VCs ------

    def inject_from_queues(self):
        moved = False
        for node in range(self.net.n_chiplets):
            queue = self.src_queues[node]
            if not queue:
                continue
            port = self.net.inj_port[node]
            claims = self.inj_claims[node]
            vc = None
            for probe in range(self.V):
                cand = (self.inj_vc_rr[node] + probe) % self.V
                if claims[cand] is None and not self.buffers[node][port][cand]:
                    vc = cand
                    break
            if vc is None:
                continue
            pkt = queue.popleft()
            self.inj_vc_rr[node] = (vc + 1) % self.V
            claims[vc] = pkt[_ID]
            q = self.buffers[node][port][vc]
            for seq in range(pkt[_SIZE]):
                q.append((pkt, seq))
            self.src_pending_flits -= pkt[_SIZE]
            self.in_network_flits += pkt[_SIZE]
            self.active.add((node, port, vc))
            moved = True
        return moved

    # -- phases 2 and 3: pipeline, allocation, ejection, link transfer ----

    def step_routers(self):
        net = self.net
        cycle = self.cycle
        moved = False
        eject_ready = {}
        nominees = {}  # (node, out_port) -> (port, vc)
        for node, port, vc in sorted(self.active):
            q = self.buffers[node][port][vc]
            if not q:
                continue
            flit = q[0]
            state = self.vc_state[node][port][vc]
            if state is None:
                pkt, seq = flit
                if seq != 0:
                    raise IcikitError("body flit reached an unallocated VC")
                if pkt[_DST] == node:
                    state = ["eject", cycle, None, None]
                else:
                    li = net.next_hop(node, pkt[_DST])
                    side = 0 if node == net.edge_nodes[li][0] else 1
                    # Route lookup plus pipeline prep; the head may request VA
                    # once the residency leaves two cycles for SA and ST.
                    state = ["va", cycle + net.pipe[node] - 3, (li, side), None]
                self.vc_state[node][port][vc] = state
            stage = state[0]
            if stage == "eject":
                eject_ready.setdefault(node, []).append((port, vc))
                continue
            if stage == "va":
                if cycle >= state[1]:
                    li_side = state[2]
                    claims = self.claims[li_side]
                    start = self.va_rr[li_side]
                    for probe in range(self.V):
                        cand = (start + probe) % self.V
                        if claims[cand] is None:
                            claims[cand] = flit[0][_ID]
                            self.va_rr[li_side] = (cand + 1) % self.V
                            state[0] = "sa"
                            state[1] = cycle + 1
                            state[3] = cand
                            moved = True
                            break
                continue
            # stage == "sa"
            if cycle >= state[1] and self.credits[state[2]][state[3]] > 0:
                li, side = state[2]
                out_port = net.port_of[node][li]
                key = (node, out_port)
                prev = nominees.get(key)
                if prev is None:
                    nominees[key] = (port, vc)
                else:
                    rr = self.sa_rr[node][out_port]
                    span = net.n_ports[node] * self.V
                    if ((port * self.V + vc - rr) % span
                            < (prev[0] * self.V + prev[1] - rr) % span):
                        nominees[key] = (port, vc)

        # Ejection: one flit per node per cycle, round-robin over input VCs.
        for node, candidates in sorted(eject_ready.items()):
            rr = self.eject_rr[node]
            span = net.n_ports[node] * self.V
            port, vc = min(candidates,
                           key=lambda pv: (pv[0] * self.V + pv[1] - rr) % span)
            self.eject_rr[node] = (port * self.V + vc + 1) % span
            self.pop_flit(node, port, vc, eject=True)
            moved = True

        # Link arbitration: half-duplex, the two directions alternate.
        per_link = {}
        for (node, out_port), (port, vc) in nominees.items():
            li = net.ports[node][out_port]
            side = 0 if node == net.edge_nodes[li][0] else 1
            per_link.setdefault(li, {})[side] = (node, port, vc)
        for li, sides in sorted(per_link.items()):
            if len(sides) == 2:
                side = self.link_toggle[li]
                self.link_toggle[li] = 1 - side
            else:
                (side,) = sides.keys()
            node, port, vc = sides[side]
            state = self.vc_state[node][port][vc]
            out_vc = state[3]
            flit = self.pop_flit(node, port, vc, eject=False)
            self.credits[(li, side)][out_vc] -= 1
            dst_node = net.edge_nodes[li][1 - side]
            dst_port = net.port_of[dst_node][li]
            # The crossbar-traversal stage is folded into the transfer: the
            # flit leaves its buffer on the switch grant and spends one ST
            # cycle plus the link delay on the wire.
            when = cycle + net.edge_delay[li] + 2
            self.arrivals.setdefault(when, []).append((dst_node, dst_port, out_vc, flit))
            self.on_wire += 1
            self.sa_rr[node][net.port_of[node][li]] = (port * self.V + vc + 1) % (
                net.n_ports[node] * self.V)
            moved = True
        return moved

    def pop_flit(self, node, port, vc, eject):
        """Remove the head flit; maintain state, claims, credits, and stats."""
        net = self.net
        q = self.buffers[node][port][vc]
        flit = q.popleft()
        pkt, seq = flit
        state = self.vc_state[node][port][vc]
        is_tail = seq == pkt[_SIZE] - 1
        if is_tail:
            if state[0] != "eject":
                self.claims[state[2]][state[3]] = None
            self.vc_state[node][port][vc] = None
        else:
            state[1] = self.cycle + 1  # next flit of the packet may move
        if not q:
            self.active.discard((node, port, vc))
        if port != net.inj_port[node]:
            # Return a credit for the freed slot to the upstream side.
            li = net.ports[node][port]
            u, _ = net.edge_nodes[li]
            side_in = 0 if node != u else 1
            self.credits[(li, side_in)][vc] += 1
        elif is_tail:
            self.inj_claims[node][vc] = None
        if eject:
            self.in_network_flits -= 1
            self.delivered_flits += 1
            pkt[_EJECTED] += 1
            if pkt[_EJECTED] == pkt[_SIZE]:
                delivery = self.cycle + net.consume[node]
                pkt[_DELIVERY] = delivery
                self.delivered_packets += 1
                self.last_delivery = max(self.last_delivery, delivery)
                if pkt[_MEASURED]:
                    self.measured_latencies.append(delivery - pkt[_CREATED])
                    self.measured_pending -= 1
                if self.win_start <= self.cycle < self.win_end:
                    self.deliveries_in_window += 1
        return flit

    # -- watchdog ----------------------------------------------------------

    def check_watchdog(self, moved):
        if moved or self.in_network_flits == 0:
            self.idle_cycles = 0
            return
        self.idle_cycles += 1
        if self.idle_cycles >= self.watchdog_limit:
            raise DeadlockError(self.cycle, sorted(self.active))

    def conservation_ok(self):
        return (self.created_flits ==
                self.delivered_flits + self.src_pending_flits
                + self.in_network_flits + self.on_wire)


def _traffic_tables(traffic: Traffic, n_chiplets: int):
    """Per-source destination samplers and traffic-weight shares."""
    per_src = [dict() for _ in range(n_chiplets)]
    total = 0.0
    for e in traffic.entries:
        if e.amount <= 0:
            continue
        per_src[e.src][e.dst] = per_src[e.src].get(e.dst, 0.0) + e.amount
        total += e.amount
    if total <= 0:
        raise IcikitError("synthetic workload needs positive total traffic")
    samplers = []
    weights = []
    for src in range(n_chiplets):
        dsts = sorted(per_src[src])
        if not dsts:
            samplers.append(None)
            weights.append(0.0)
            continue
        cum = []
        acc = 0.0
        for d in dsts:
            acc += per_src[src][d]
            cum.append(acc)
        samplers.append((dsts, cum, acc))
        weights.append(acc / total)
    return samplers, weights


def simulate(bundle: DesignBundle, workload, params: SimParams | None = None,
             routing_table: RoutingTable | None = None) -> SimResult:
    """Run one cycle-level simulation of a synthetic or trace workload."""
    table = routing_table if routing_table is not None else bundle.routing_table
    resolved = _resolve_params(params, bundle.n_nodes)
    net = _Network(bundle, table, resolved)
    if isinstance(workload, SyntheticLoad):
        return _run_synthetic(net, workload)
    if isinstance(workload, TraceLoad):
        return _run_trace(net, workload.trace)
    raise IcikitError(f"unknown workload {type(workload).__name__}")


def _run_synthetic(net: _Network, load: SyntheticLoad) -> SimResult:
    p = net.params
    run = _Run(net, p)
    samplers, weights = _traffic_tables(load.traffic, net.n_chiplets)
    rate = load.injection_rate
    n_ch = net.n_chiplets
    size = p.packet_size_flits

    # Per-node Bernoulli at the node's share of the network rate, realized by
    # geometric gap sampling so idle nodes cost nothing per cycle.
    node_prob = [0.0] * n_ch
    rngs = [None] * n_ch
    heap = []
    for node in range(n_ch):
        prob = min(1.0, rate * n_ch * weights[node] / size)
        node_prob[node] = prob
        rngs[node] = random.Random(p.seed * 1_000_003 + node * 7_919 + 11)
        if prob > 0:
            heapq.heappush(heap, (_first_gap(rngs[node], prob) - 1, node))

    warm_end = p.warmup_cycles
    meas_end = p.warmup_cycles + p.measurement_cycles
    hard_end = meas_end + p.drain_cycle_limit
    run.win_start, run.win_end = warm_end, meas_end
    sample_every = max(1, p.measurement_cycles // 10)
    backlog_samples = []
    zero_load_estimate = proxy.latency_proxy(net.graph, RoutingTable(net.tables),
                                             load.traffic)
    threshold = p.latency_saturation_factor * zero_load_estimate
    aborted_saturated = False

    while True:
        cycle = run.cycle
        if cycle >= hard_end:
            break
        if cycle >= meas_end and run.measured_pending == 0:
            break
        moved = run.do_arrivals()
        while heap and heap[0][0] <= cycle:
            _, node = heapq.heappop(heap)
            measured = warm_end <= cycle < meas_end
            dsts, cum, acc = samplers[node]
            pick = rngs[node].random() * acc
            dst = dsts[bisect_left(cum, pick)]
            run.enqueue_source(run.make_packet(node, dst, size, measured))
            heapq.heappush(heap, (cycle + _first_gap(rngs[node], node_prob[node]), node))
        if run.inject_from_queues():
            moved = True
        if run.step_routers():
            moved = True
        run.check_watchdog(moved)
        if p.debug_checks and not run.conservation_ok():
            raise IcikitError(f"flit conservation violated at cycle {cycle}")
        if cycle >= warm_end and (cycle - warm_end) % sample_every == 0:
            if cycle < meas_end:
                backlog_samples.append(run.created_packets - run.delivered_packets)
            # Runs far past saturation are cut short: enough measured samples
            # already above the latency threshold, or a monotone backlog.
            lat = run.measured_latencies
            if len(lat) >= 50 and sum(lat) / len(lat) > threshold:
                aborted_saturated = True
                break
            if len(backlog_samples) >= 5 and all(
                    b2 > b1 for b1, b2 in zip(backlog_samples[-5:], backlog_samples[-4:])):
                aborted_saturated = True
                break
        run.cycle += 1

    accepted = 0.0
    if p.measurement_cycles > 0:
        accepted = (run.deliveries_in_window * size) / (n_ch * p.measurement_cycles)
    latencies = run.measured_latencies
    avg_latency = sum(latencies) / len(latencies) if latencies else math.inf
    backlog_growing = (len(backlog_samples) >= 3 and
                       all(b2 > b1 for b1, b2 in zip(backlog_samples, backlog_samples[1:])))
    saturated = (aborted_saturated
                 or not latencies
                 or avg_latency > threshold
                 or backlog_growing
                 or run.measured_pending > 0)
    return SimResult(avg_packet_latency_cycles=avg_latency,
                     offered_rate=rate,
                     accepted_rate=accepted,
                     delivered_packets=run.delivered_packets,
                     saturated=saturated,
                     makespan_cycles=run.last_delivery,
                     measured_packets=len(latencies))


def _first_gap(rng, prob):
    if prob >= 1.0:
        return 1
    u = rng.random()
    return int(math.log(max(u, 1e-300)) / math.log(1.0 - prob)) + 1


def _run_trace(net: _Network, trace: Trace) -> SimResult:
    p = net.params
    run = _Run(net, p)
    delivery_cycle = {}
    packets = {}
    waiting = sorted(trace.messages, key=lambda m: m.id)
    in_flight = []
    hard_limit = p.drain_cycle_limit + 1000 * (len(trace.messages) + 1)

    while len(delivery_cycle) < len(trace.messages):
        cycle = run.cycle
        if cycle > hard_limit:
            raise IcikitError("trace replay exceeded the cycle budget")
        moved = run.do_arrivals()
        still_waiting = []
        for m in waiting:  # eligible messages inject in id order
            ready = (m.earliest_injection_cycle <= cycle
                     and all(dep in delivery_cycle and delivery_cycle[dep] < cycle
                             for dep in m.deps))
            if ready:
                pkt = run.make_packet(m.src, m.dst, m.size_flits, True)
                packets[m.id] = pkt
                in_flight.append(m.id)
                run.enqueue_source(pkt)
            else:
                still_waiting.append(m)
        waiting = still_waiting
        if run.inject_from_queues():
            moved = True
        if run.step_routers():
            moved = True
        for mid in [mid for mid in in_flight if packets[mid][_DELIVERY] is not None]:
            delivery_cycle[mid] = packets[mid][_DELIVERY]
            in_flight.remove(mid)
        run.check_watchdog(moved)
        if p.debug_checks and not run.conservation_ok():
            raise IcikitError(f"flit conservation violated at cycle {cycle}")
        run.cycle += 1

    makespan = max(delivery_cycle.values(), default=0)
    latencies = run.measured_latencies
    avg = sum(latencies) / len(latencies) if latencies else 0.0
    return SimResult(avg_packet_latency_cycles=float(makespan),
                     offered_rate=0.0,
                     accepted_rate=0.0,
                     delivered_packets=len(delivery_cycle),
                     saturated=False,
                     makespan_cycles=makespan,
                     measured_packets=len(latencies))


def replay_trace(bundle: DesignBundle, routing_table: RoutingTable | None,
                 trace: Trace, params: SimParams | None = None) -> SimResult:
    """Dependency-tracked replay: a message becomes eligible at
    max(earliest_injection_cycle, 1 + delivery cycle of every dependency);
    the result carries the makespan in the latency field."""
    return simulate(bundle, TraceLoad(trace), params, routing_table)


def single_packet_latency(bundle: DesignBundle, src: int, dst: int,
                          params: SimParams | None = None,
                          routing_table: RoutingTable | None = None) -> int:
    """Exact deterministic latency of one isolated packet."""
    size = (params or SimParams()).packet_size_flits
    trace = Trace([TraceMessage(id=0, earliest_injection_cycle=0, src=src,
                                dst=dst, size_flits=size, deps=[])])
    result = replay_trace(bundle, routing_table, trace, params)
    return result.makespan_cycles


def zero_load_latency(bundle: DesignBundle, routing_table: RoutingTable | None,
                      traffic: Traffic, params: SimParams | None = None) -> float:
    """Average packet latency at a vanishing injection rate (0.001
    flits/node/cycle), with the measurement window stretched until roughly
    400 packets are sampled."""
    p = _resolve_params(params, bundle.n_nodes)
    rate = 0.001
    needed = int(400 * p.packet_size_flits / (rate * bundle.n_chiplets)) + 1
    p.measurement_cycles = max(p.measurement_cycles, needed)
    p.drain_cycle_limit = max(p.drain_cycle_limit, 20 * p.measurement_cycles)
    result = simulate(bundle, SyntheticLoad(traffic, rate), p, routing_table)
    return result.avg_packet_latency_cycles


def saturation_throughput(bundle: DesignBundle, routing_table: RoutingTable | None,
                          traffic: Traffic,
                          params: SimParams | None = None) -> SaturationSearch:
    """Coarse-to-fine saturation search: raise the injection rate in
    10%-steps until a run saturates, back off, then refine with 1%- and
    0.1%-steps; returns the highest non-saturated rate.

    A run that deadlocks counts as saturated at that rate.  If the very first
    probed rate saturates the search reports 0 with a warning.
    """
    attempts = []
    results = []

    def saturated_at(tenths):
        rate = tenths / 1000.0
        attempts.append(tenths / 10.0)
        try:
            result = simulate(bundle, SyntheticLoad(traffic, rate), params,
                              routing_table)
        except DeadlockError:
            result = SimResult(math.inf, rate, 0.0, 0, True)
        results.append(result)
        return result.saturated

    last_stable = 0
    first = True
    for step in (100, 10, 1):  # tenths of a percent
        rate = last_stable + step
        while rate <= 1000:
            if saturated_at(rate):
                if first:
                    return SaturationSearch(0.0, attempts, results,
                                            "saturated at the first probed rate")
                break
            first = False
            last_stable = rate
            rate += step
    return SaturationSearch(last_stable / 1000.0, attempts, results, None)
