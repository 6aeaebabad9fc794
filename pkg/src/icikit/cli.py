"""Command-line entry point.

Subcommands: validate, estimate, report, generate, simulate, sweep, pareto,
compare, render, plotdata.  Exit status 0 on success, 1 on validation
failures, 2 on runtime errors (unreadable or malformed inputs, simulation
failures, bad arguments).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

from . import dse, flitsim, netgen, render, reports
from .model import IcikitError, load_design, save_design, write_json, read_json
from .validate import ValidationFailure, validate, validate_or_raise

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _emit(document, out_path):
    if out_path:
        write_json(out_path, document)
    else:
        json.dump(document, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")


def _load_valid(design_path):
    bundle = load_design(design_path)
    validate_or_raise(bundle)
    return bundle


def cmd_validate(args):
    bundle = load_design(args.design)
    report = validate(bundle)
    if report:
        for violation in report:
            print(str(violation), file=sys.stderr)
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def cmd_estimate(args):
    bundle = _load_valid(args.design)
    report = reports.perf_report(bundle, with_edges=args.edges)
    _emit(report.to_json(), args.output)
    return EXIT_OK


def cmd_report(args):
    bundle = _load_valid(args.design)
    document = {"area": reports.area_report(bundle),
                "power": {"total_power_w": reports.power_report(bundle)},
                "cost": reports.cost_report(bundle).to_json()}
    _emit(document, args.output)
    return EXIT_OK


def cmd_generate(args):
    fragment = read_json(args.fragment)
    known = {"topology", "rows", "cols", "shg_bits", "traffic_pattern",
             "routing_algorithm", "seed", "chiplet_params", "packaging_params",
             "tech_params", "hotspot_count", "hotspot_share"}
    unknown = set(fragment) - known
    if unknown:
        raise IcikitError(f"{args.fragment}: unknown field '{sorted(unknown)[0]}'")
    exp = dse.Experiment(
        topologies=[fragment.get("topology", "mesh")],
        grid_sizes=[(fragment.get("rows", 3), fragment.get("cols", 3))],
        traffic_patterns=[fragment.get("traffic_pattern", "uniform")],
        routing_algorithms=[fragment.get("routing_algorithm", "lowest_id")],
        seeds=[fragment.get("seed", 0)],
        chiplet_params=[dse._dataclass_from(dse.ChipletParams,
                                            fragment.get("chiplet_params", {}),
                                            "chiplet_params")],
        packaging_params=[dse._dataclass_from(dse.PackagingParams,
                                              fragment.get("packaging_params", {}),
                                              "packaging_params")],
        tech_params=dse._dataclass_from(dse.TechParams,
                                        fragment.get("tech_params", {}),
                                        "tech_params"),
        hotspot_count=fragment.get("hotspot_count", 4),
        hotspot_share=fragment.get("hotspot_share", 0.5),
    )
    point = dse.expand_points(exp)[0]
    if fragment.get("shg_bits"):
        point.shg_bits = fragment["shg_bits"]
    bundle = dse.materialize_point(exp, point)
    validate_or_raise(bundle)
    design_path = save_design(bundle, args.output, stem="design")
    print(design_path)
    return EXIT_OK


def cmd_simulate(args):
    bundle = _load_valid(args.design)
    params = bundle.sim_params
    if args.params:
        from .model import parse_sim_params, _Ctx
        params = parse_sim_params(read_json(args.params), _Ctx(args.params))
    modes = sum(1 for flag in (args.rate is not None, args.saturation, args.trace)
                if flag)
    if modes != 1:
        raise IcikitError("choose exactly one of --rate, --saturation, --trace")
    if args.rate is not None:
        result = flitsim.simulate(bundle, flitsim.SyntheticLoad(bundle.traffic,
                                                                args.rate), params)
        _emit(_result_to_json(result), args.output)
    elif args.saturation:
        search = flitsim.saturation_throughput(bundle, None, bundle.traffic, params)
        document = {"saturation_rate_flits_node_cycle": search.rate,
                    "attempted_percent": search.attempted_percent}
        if search.warning:
            document["warning"] = search.warning
            print(f"warning: {search.warning}", file=sys.stderr)
        _emit(document, args.output)
        if args.log:
            header = ["offered_rate", "avg_packet_latency_cycles", "accepted_rate",
                      "saturated", "delivered_packets"]
            rows = [[r.offered_rate, r.avg_packet_latency_cycles, r.accepted_rate,
                     r.saturated, r.delivered_packets] for r in search.results]
            render.write_csv(args.log, header, rows)
    else:
        if bundle.trace is None:
            raise IcikitError("design has no trace input")
        result = flitsim.replay_trace(bundle, None, bundle.trace, params)
        _emit(_result_to_json(result), args.output)
    return EXIT_OK


def _result_to_json(result) -> dict:
    return {"avg_packet_latency_cycles": result.avg_packet_latency_cycles,
            "offered_rate": result.offered_rate,
            "accepted_rate": result.accepted_rate,
            "delivered_packets": result.delivered_packets,
            "saturated": result.saturated,
            "makespan_cycles": result.makespan_cycles,
            "measured_packets": result.measured_packets}


def cmd_sweep(args):
    exp = dse.load_experiment(args.experiment)
    t0 = time.time()

    def progress(done, total):
        if args.verbose and (done % 500 == 0 or done == total):
            print(f"  {done}/{total} points, {time.time() - t0:.0f}s",
                  file=sys.stderr)

    rows = dse.run_experiments(exp, args.output, workers=args.workers,
                               progress=progress)
    errors = sum(1 for r in rows if r.get("error"))
    print(f"{len(rows)} design points -> {args.output} ({errors} error rows)")
    return EXIT_OK


def cmd_pareto(args):
    rows = dse.read_results_csv(args.results)
    front = dse.pareto_front(rows, args.max_area_overhead, args.baseline)
    header = ["point", "topology", "shg_bits", "avg_latency_cycles",
              "throughput_units", "chiplet_area_sum_mm2"]
    out_rows = [[r.get(c, "") for c in header] for r in front]
    if args.output:
        render.write_csv(args.output, header, out_rows)
    else:
        sys.stdout.write(render.csv_text(header, out_rows))
    return EXIT_OK


def cmd_compare(args):
    rows = dse.read_results_csv(args.results)
    comparison = dse.compare_proxy_vs_sim(rows)
    _emit(comparison, args.output)
    return EXIT_OK


def cmd_render(args):
    bundle = _load_valid(args.design)
    svg = render.render_svg(bundle)
    try:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(svg)
    except OSError as exc:
        raise IcikitError(f"cannot write {args.output}: {exc}") from exc
    print(args.output)
    return EXIT_OK


def cmd_plotdata(args):
    try:
        with open(args.results, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IcikitError(f"cannot read {args.results}: {exc}") from exc
    header, data = render.plot_data(rows, args.kind)
    if args.output:
        render.write_csv(args.output, header, data)
    else:
        sys.stdout.write(render.csv_text(header, data))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icikit",
        description="Rapid design-space exploration for inter-chiplet interconnects")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="cross-validate a design's input files")
    p.add_argument("design")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("estimate", help="latency/throughput proxies plus reports")
    p.add_argument("design")
    p.add_argument("--edges", action="store_true",
                   help="include the per-link bandwidth/flow table")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("report", help="area, power, and cost reports only")
    p.add_argument("design")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("generate", help="materialize one design point as input files")
    p.add_argument("fragment", help="JSON description of the design point")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="cycle-level simulation")
    p.add_argument("design")
    p.add_argument("--rate", type=float, help="injection rate, flits/node/cycle")
    p.add_argument("--saturation", action="store_true",
                   help="run the saturation-throughput search")
    p.add_argument("--trace", action="store_true", help="replay the design's trace")
    p.add_argument("--params", help="JSON file overriding simulator parameters")
    p.add_argument("--log", help="CSV log of per-run results (saturation mode)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run an experiments file")
    p.add_argument("experiment")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pareto", help="extract the latency/throughput Pareto front")
    p.add_argument("results", help="results.csv from a sweep")
    p.add_argument("--max-area-overhead", type=float, default=None,
                   help="feasibility cap vs the baseline row, e.g. 0.08 for 8%%")
    p.add_argument("--baseline", type=int, default=None,
                   help="row index of the baseline (default: smallest area)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("compare", help="proxy-vs-simulator error and speedup table")
    p.add_argument("results")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="draw the design as an SVG")
    p.add_argument("design")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("plotdata", help="reshape results for plotting")
    p.add_argument("results")
    p.add_argument("--kind", required=True, choices=render.PLOT_KINDS)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailure as exc:
        for violation in exc.report:
            print(str(violation), file=sys.stderr)
        return EXIT_VALIDATION
    except IcikitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
