"""Command-line front door: mode commands, the worked-example catalog with
physical-parameter conversion, file output, and the service launcher.

``--json`` prints the exact payload the HTTP API returns for the equivalent
request (both go through the same assembly functions); ``--out`` writes CSV
when the filename ends in .csv and the command has a CSV form, JSON
otherwise.  Exit status: 0 success, 2 invalid input or size cap, 3 numeric
failure.
"""

import argparse
import json
import re
import sys

from . import service
from .dde_sim import HistorySpec
from .errors import CapExceeded, InvalidInput, NumericFailure
from .examples import get_example, list_examples
from .quasipoly import Quasipolynomial
from .report import build_report, render_html, render_json
from .spectrum import SpectralWindow

_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _absorb_negative_values(argv):
    """Glue ``--flag -1,-2`` into ``--flag=-1,-2`` so option parsing does not
    mistake a leading minus sign for a new flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok.startswith("--")
            and "=" not in tok
            and i + 1 < len(argv)
            and _NEGATIVE_VALUE.match(argv[i + 1])
        ):
            out.append(tok + "=" + argv[i + 1])
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _floats(text):
    try:
        return [float(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise InvalidInput("validation_error", f"expected comma-separated numbers, got {text!r}") from exc


def _grid(text):
    match = re.fullmatch(r"(\d+)x(\d+)", text)
    if not match:
        raise InvalidInput("validation_error", f"expected a grid like 200x200, got {text!r}")
    return int(match.group(1)), int(match.group(2))


def _history(text):
    kind, sep, data = text.partition(":")
    if not sep:
        raise InvalidInput(
            "validation_error",
            f"expected history as kind:v1,v2,... (e.g. constant:0.1), got {text!r}",
        )
    return HistorySpec(kind=kind, data=tuple(_floats(data)))


def _fmt(value):
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        return "%.6g" % value
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def _kv(key, value):
    return "%-14s %s" % (key, _fmt(value))


def _resolve_plant(args):
    """(a, m, example-or-None) from either --a/--m or --example."""
    if args.example:
        overrides = {}
        for item in args.param or []:
            key, sep, raw = item.partition("=")
            if not sep:
                raise InvalidInput(
                    "validation_error", f"expected --param name=value, got {item!r}"
                )
            overrides[key] = float(raw)
        if getattr(args, "gravity", None) is not None:
            overrides["gravity"] = args.gravity
        ex = get_example(args.example, **overrides)
        return list(ex.a), ex.m, ex
    if args.a is None or args.m is None:
        raise InvalidInput(
            "validation_error", "provide either --example or both --a and --m"
        )
    return _floats(args.a), args.m, None


def _qp_from_args(args) -> Quasipolynomial:
    if args.a is None or args.b is None or args.tau is None:
        raise InvalidInput("validation_error", "provide --a, --b and --tau")
    return Quasipolynomial(a=_floats(args.a), b=_floats(args.b), tau=args.tau)


def _emit(args, payload, human_lines, csv_text=None):
    if args.out:
        if args.out.endswith(".csv"):
            if csv_text is None:
                raise InvalidInput(
                    "validation_error", "this command has no CSV form; use a .json path"
                )
            content = csv_text
        else:
            content = json.dumps(payload, indent=2) + "\n"
        with open(args.out, "w") as fh:
            fh.write(content)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in human_lines:
            print(line)
    return 0


def _placement_lines(payload):
    qp = payload["qp"]
    return [
        _kv("s0", payload["s0"]),
        _kv("tau", qp["tau"]),
        _kv("multiplicity", payload["multiplicity"]),
        _kv("condition", payload["condition"]),
        _kv("a", qp["a"]),
        _kv("b", qp["b"]),
        _kv("max residual", max(payload["residuals"])),
    ]


# ------------------------------------------------------------- subcommands


def _run_examples(args, limits):
    payload = list_examples()
    lines = []
    for ex_id, info in payload.items():
        lines.append(ex_id)
        for name, meta in info["params"].items():
            lines.append(
                "  %-10s %-10s %s (%s)" % (name, _fmt(meta["default"]), meta["meaning"], meta["unit"])
            )
        lines.append("  " + _kv("a", info["derived"]["a"]))
        lines.append("  " + _kv("gains", ", ".join(info["gains"])))
    return _emit(args, payload, lines)


def _run_generic_mid(args, limits):
    payload = service.generic_mid_payload(args.n, args.m, args.tau, args.s0, limits=limits)
    return _emit(args, payload, _placement_lines(payload))


def _run_control_mid(args, limits):
    a, m, ex = _resolve_plant(args)
    tau = s0 = None
    branch = args.branch
    if args.tau is not None:
        if args.tau in ("smallest", "all"):
            if args.s0 is None:
                raise InvalidInput(
                    "validation_error",
                    "--tau smallest|all selects delay solutions and needs --s0",
                )
            branch = args.tau
            s0 = args.s0
        else:
            try:
                tau = float(args.tau)
            except ValueError as exc:
                raise InvalidInput(
                    "validation_error",
                    f"--tau takes a delay value or smallest|all, got {args.tau!r}",
                ) from exc
            s0 = args.s0
    else:
        s0 = args.s0
    if ex is not None:
        payload = service.control_mid_payload(
            example=ex.id, params=dict(ex.params), tau=tau, s0=s0, branch=branch, limits=limits
        )
    else:
        payload = service.control_mid_payload(a, m, tau=tau, s0=s0, branch=branch, limits=limits)
    lines = []
    for k, sol in enumerate(payload["solutions"]):
        lines.append("solution %d" % k)
        lines.append("  " + _kv("s0", sol["s0"]))
        lines.append("  " + _kv("tau", sol["tau"]))
        lines.append("  " + _kv("b", sol["b"]))
        lines.append("  " + _kv("max residual", max(sol["residuals"])))
        if "gains" in sol:
            if sol["gains"] is None:
                lines.append("  gains unavailable: delay below the physical minimum")
            else:
                for name, value in sol["gains"].items():
                    lines.append("  " + _kv(name, value))
    if not payload["solutions"]:
        lines.append("no admissible solutions in the search range")
    return _emit(args, payload, lines)


def _run_crrid(args, limits):
    payload = service.crrid_payload(args.n, args.m, args.tau, _floats(args.roots), limits=limits)
    qp = payload["qp"]
    lines = [
        _kv("roots", payload["roots"]),
        _kv("tau", qp["tau"]),
        _kv("condition", payload["condition"]),
        _kv("a", qp["a"]),
        _kv("b", qp["b"]),
        _kv("max residual", max(payload["residuals"])),
    ]
    return _emit(args, payload, lines)


def _run_admissibility(args, limits):
    a, m, ex = _resolve_plant(args)
    ns0, ntau = _grid(args.grid)
    grid = service.admissibility_grid(
        a, m, args.s0_min, args.tau_max, ns0, ntau, limits=limits
    )
    payload = grid.to_dict()
    if ex is not None:
        payload["system"] = service.system_payload(ex)
    lines = [
        _kv("s0 range", [min(payload["s0_values"]), max(payload["s0_values"])]),
        _kv("tau range", [min(payload["tau_values"]), max(payload["tau_values"])]),
        _kv("samples", len(payload["s0_values"]) * len(payload["tau_values"])),
        _kv("curves", len(payload["curves"])),
    ]
    return _emit(args, payload, lines, csv_text=grid.to_csv())


def _run_spectrum(args, limits):
    qp = _qp_from_args(args)
    window = SpectralWindow(args.x_min, args.x_max, args.y_max)
    result = service.spectrum_result(qp, window, grid=_grid(args.grid), limits=limits)
    payload = service.spectrum_payload_from(result)
    lines = [
        _kv("abscissa", payload["abscissa"]),
        _kv("certified", payload["certified"]),
        _kv("roots", payload["total_count"]),
    ]
    for root in payload["roots"]:
        lines.append(
            "  re=%-12s im=%-12s mult=%d residual=%s"
            % (_fmt(root["re"]), _fmt(root["im"]), root["multiplicity"], _fmt(root["residual"]))
        )
    return _emit(args, payload, lines, csv_text=result.to_csv())


def _run_sensitivity(args, limits):
    qp = _qp_from_args(args)
    trace = service.sensitivity_trace(
        qp, args.s0, span=args.span, steps=args.steps, iterations=args.iterations, limits=limits
    )
    payload = service.sensitivity_payload_from(trace)
    lines = [
        _kv("base tau", payload["base_tau"]),
        _kv("tau range", [min(payload["taus"]), max(payload["taus"])]),
        _kv("branches", len(payload["branches"])),
        _kv("steps", len(payload["taus"])),
    ]
    return _emit(args, payload, lines, csv_text=trace.to_csv())


def _run_simulate(args, limits):
    qp = _qp_from_args(args)
    window = None
    if args.window:
        values = _floats(args.window)
        if len(values) != 2:
            raise InvalidInput("validation_error", "expected --window t1,t2")
        window = (values[0], values[1])
    result = service.simulation_result(
        qp, _history(args.history), T=args.T, h=args.h, window=window, limits=limits
    )
    payload = result.to_dict()
    lines = [
        _kv("samples", len(payload["t"])),
        _kv("final y", payload["y"][-1]),
        _kv("final state", payload["final_state"]),
        _kv("decay", payload["decay_estimate"]),
    ]
    return _emit(args, payload, lines, csv_text=result.to_csv())


def _run_factorization(args, limits):
    qp = _qp_from_args(args)
    payload = service.factorization_payload(qp, args.s0, multiplicity=args.multiplicity, limits=limits)
    form = payload["form"]
    lines = [
        _kv("s0", form["s0"]),
        _kv("multiplicity", form["multiplicity"]),
        _kv("weight", form["weight_coeffs"]),
        _kv("hyper params", form["hyper_params"]),
        _kv("residual", form["validation_residual"]),
    ]
    return _emit(args, payload, lines)


def _run_report(args, limits):
    with open(args.payloads) as fh:
        payloads = json.load(fh)
    selection = set(_split_names(args.select)) if args.select else set(payloads)
    document = build_report(
        selection, payloads, title=args.title, timestamp=args.timestamp
    )
    fmt = "json" if args.json else args.format
    content = render_html(document) if fmt == "html" else render_json(document)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(content)
        if not args.json:
            print("wrote %s" % args.out)
        return 0
    print(content, end="" if content.endswith("\n") else "\n")
    return 0


def _split_names(text):
    return [part for part in text.split(",") if part]


def _run_serve(args, limits):
    service.serve(host=args.host, port=args.port)
    return 0


def _add_output_flags(sub):
    sub.add_argument("--json", action="store_true", help="print the API payload as JSON")
    sub.add_argument("--out", help="write the payload to a file (.csv where supported)")


def _add_plant_flags(sub):
    sub.add_argument("--a", help="comma-separated plant coefficients, ascending")
    sub.add_argument("--m", type=int, help="feedback polynomial degree")
    sub.add_argument("--example", help="use a catalog system: oscillator|pendulum|windtunnel")
    sub.add_argument(
        "--param",
        action="append",
        help="physical parameter override as name=value (repeatable)",
    )
    sub.add_argument("--gravity", type=float, help="gravity override for the pendulum")


def _add_qp_flags(sub):
    sub.add_argument("--a", required=True, help="comma-separated a-coefficients, ascending")
    sub.add_argument("--b", required=True, help="comma-separated b-coefficients, ascending")
    sub.add_argument("--tau", type=float, required=True, help="delay")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="delaylab",
        description="Design and certify stabilizing delayed feedback laws.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("examples", help="list the worked-example catalog")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_examples)

    sub = subs.add_parser("generic-mid", help="maximal-multiplicity design of all coefficients")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--tau", type=float, required=True)
    sub.add_argument("--s0", type=float, required=True)
    _add_output_flags(sub)
    sub.set_defaults(run=_run_generic_mid)

    sub = subs.add_parser(
        "control-mid", help="fix the plant, choose feedback gains for a multiple root"
    )
    _add_plant_flags(sub)
    sub.add_argument(
        "--tau", help="delay value (solves s0), or smallest|all with --s0 (selects delays)"
    )
    sub.add_argument("--s0", type=float, help="target root (solves the delay)")
    sub.add_argument("--branch", choices=("rightmost", "all"), help="which s0 solutions")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_control_mid)

    sub = subs.add_parser("crrid", help="assign distinct real roots")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--tau", type=float, required=True)
    sub.add_argument("--roots", required=True, help="comma-separated real roots")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_crrid)

    sub = subs.add_parser("admissibility", help="map the admissible (s0, tau) region")
    _add_plant_flags(sub)
    sub.add_argument("--s0-min", dest="s0_min", type=float, required=True)
    sub.add_argument("--tau-max", dest="tau_max", type=float, required=True)
    sub.add_argument("--grid", default="200x200", help="resolution as NS0xNTAU")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_admissibility)

    sub = subs.add_parser("spectrum", help="locate and certify roots in a window")
    _add_qp_flags(sub)
    sub.add_argument("--x-min", dest="x_min", type=float, required=True)
    sub.add_argument("--x-max", dest="x_max", type=float, required=True)
    sub.add_argument("--y-max", dest="y_max", type=float, required=True)
    sub.add_argument("--grid", default="400x400", help="scan resolution as NXxNY")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_spectrum)

    sub = subs.add_parser("sensitivity", help="track root branches as the delay varies")
    _add_qp_flags(sub)
    sub.add_argument("--s0", type=float, required=True)
    sub.add_argument("--span", type=float, default=0.2)
    sub.add_argument("--steps", type=int, default=41)
    sub.add_argument("--iterations", type=int, default=50)
    _add_output_flags(sub)
    sub.set_defaults(run=_run_sensitivity)

    sub = subs.add_parser("simulate", help="integrate the closed loop from a history")
    _add_qp_flags(sub)
    sub.add_argument(
        "--history", required=True, help="history as kind:v1,v2,... (constant|polynomial|sampled)"
    )
    sub.add_argument("--T", type=float, required=True, help="horizon")
    sub.add_argument("--h", type=float, required=True, help="step size")
    sub.add_argument("--window", help="decay-fit window as t1,t2")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_simulate)

    sub = subs.add_parser("factorization", help="integral form of the design at its root")
    _add_qp_flags(sub)
    sub.add_argument("--s0", type=float, required=True)
    sub.add_argument("--multiplicity", type=int, help="root multiplicity (detected when omitted)")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_factorization)

    sub = subs.add_parser("report", help="assemble a report from saved payloads")
    sub.add_argument("--payloads", required=True, help="JSON file of mode -> payload")
    sub.add_argument("--select", help="comma-separated modes (default: all in the file)")
    sub.add_argument("--format", choices=("html", "json"), default="json")
    sub.add_argument("--title", default="Delay feedback design report")
    sub.add_argument("--timestamp", default="")
    _add_output_flags(sub)
    sub.set_defaults(run=_run_report)

    sub = subs.add_parser("serve", help="run the HTTP API")
    sub.add_argument("--host")
    sub.add_argument("--port", type=int)
    sub.set_defaults(run=_run_serve, json=False, out=None)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _build_parser().parse_args(_absorb_negative_values(argv))
    try:
        return args.run(args, service.limits_enabled())
    except (InvalidInput, CapExceeded) as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
