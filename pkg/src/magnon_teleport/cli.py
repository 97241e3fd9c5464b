"""Command-line front end.

Exit codes: 0 success, 1 argument error, 2 no solution, 3 I/O or format error.
Curves go out as CSV with ``#`` header lines; states and reports as JSON.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .channel_builder import (
    RootSearch,
    build_ghz,
    build_n_magnon_channel,
    build_one_magnon_channel,
    build_symmetric_w,
    build_w_like,
    one_magnon_condition,
    ring_condition_lhs,
    solve_ring_times,
    solve_tri_times,
    tri_condition_lhs,
)
from .channel_io import ChannelFormatError, dumps_channel, load_channel
from .magnon_dynamics import INF, bessel_j0, ring_evolve, tri_evolve
from .spin_bath import BathSpec, compare_ghz_w, fidelity_vs_time
from .teleport_protocol import (
    ProtocolError,
    TeleportSetup,
    analyze_channel,
    average_fidelity,
    haar_inputs,
    prepare_scheme,
    run_teleport,
)

EXIT_OK, EXIT_ARGS, EXIT_NO_ROOT, EXIT_IO = 0, 1, 2, 3

# closed-form phases quoted for the Delta = 1 switch-off state
REFERENCE_PHASES = {"phi1": math.atan(-math.sqrt(2)), "phi2": math.atan(math.sqrt(2) / 3)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def parse_n(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return INF
    n = int(text)
    if n < 2:
        raise UsageError(f"N must be at least 2, got {n}")
    return n


def parse_list(text: str, conv=float) -> list:
    items = [conv(t) for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError(f"empty list {text!r}")
    return items


def parse_window(text: str, step: float | None) -> tuple[float, float, float]:
    """``lo:hi`` or ``lo:hi:step``; an explicit ``--step`` wins."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"window must be lo:hi or lo:hi:step, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    st = step if step is not None else (float(parts[2]) if len(parts) == 3 else 0.01)
    if not lo < hi:
        raise UsageError(f"empty window {text!r}")
    if not st > 0:
        raise UsageError("step must be positive")
    return lo, hi, st


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    return RootSearch((lo, hi), step).grid()


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(command: str, notes: list[str], columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# magnon-teleport {command} v{__version__}\n")
    for note in notes:
        buf.write(f"# {note}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) if v is not None else "" for v in row) + "\n")
    return buf.getvalue()


def _map(fn, items, parallel: bool) -> list:
    if parallel:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- commands ---------------------------------------------------------------


def cmd_solve_times(args) -> int:
    lo, hi, step = parse_window(args.window, args.step)
    search = RootSearch((lo, hi), step)
    if args.tri:
        delta = args.delta
        roots = solve_tri_times(delta, search)
        resid = [tri_condition_lhs(r, delta) for r in roots]
        label = f"three-site chain, delta={_fmt(delta)}"
    else:
        n = parse_n(args.n)
        roots = solve_ring_times(n, search)
        resid = [ring_condition_lhs(n, r) for r in roots]
        label = f"ring, N={'inf' if n == INF else n}"
    text = _csv(
        "solve-times",
        [label, f"window {_fmt(lo)}:{_fmt(hi)} step {_fmt(step)}", "root: theta = J t; residual: condition value at root"],
        ["root", "residual"],
        zip(roots, resid),
    )
    _write(text, args.out)
    return EXIT_OK if roots else EXIT_NO_ROOT


def cmd_fig2(args) -> int:
    lo, hi, step = parse_window(args.window, args.step)
    deltas = parse_list(args.delta)
    for d in deltas:
        if not 0 <= d <= 1:
            raise UsageError(f"delta {d} outside [0, 1]")
    thetas = grid(lo, hi, step)
    cols = _map(lambda d: tri_condition_lhs(thetas, d), deltas, args.parallel)
    text = _csv(
        "fig2",
        [
            "three-site switch-off condition, zero at perfect-channel times",
            "lhs = 3 cos(theta (1 + 2 delta) / 2) + cos(3 theta / 2) + 1.5 cos((1 - delta) theta) - 1",
        ],
        ["theta"] + [f"lhs_delta={_fmt(d)}" for d in deltas],
        zip(thetas, *cols),
    )
    _write(text, args.out)
    return EXIT_OK


def cmd_fig3(args) -> int:
    lo, hi, step = parse_window(args.window, args.step)
    ns = [parse_n(t) for t in args.n.split(",") if t.strip()]
    if not ns:
        raise UsageError("empty N list")
    if INF in ns and hi > 50:
        raise UsageError("N=inf uses J0, supported for theta <= 50")
    thetas = grid(lo, hi, step)
    cols = _map(lambda n: ring_condition_lhs(n, thetas), ns, args.parallel)
    text = _csv(
        "fig3",
        [
            "ring switch-off condition 2 |alpha_1|^2 - 1, zero at perfect-channel times",
            "N=inf column is 2 J0(theta)^2 - 1",
        ],
        ["theta"] + [f"lhs_N={'inf' if n == INF else n}" for n in ns],
        zip(thetas, *cols),
    )
    _write(text, args.out)
    return EXIT_OK


def _profile(text: str):
    if text in ("fourier", "uniform"):
        return text
    return parse_list(text)


def cmd_build_channel(args) -> int:
    n = args.n
    kind = args.kind
    bob = args.bob if args.bob is not None else n
    if kind == "magnon":
        if args.magnons == 1:
            state = build_one_magnon_channel(n, bob, args.sign, _profile(args.profile))
        else:
            state = build_n_magnon_channel(n, args.magnons, bob, args.sign)
    elif kind == "ghz":
        state = build_ghz(n)
    elif kind == "w-like":
        if n != 3:
            raise UsageError("the W-like channel has three qubits")
        state = build_w_like()
    else:
        state = build_symmetric_w(n)
    if not 1 <= bob <= n:
        raise UsageError(f"bob site {bob} outside 1..{n}")
    _write(dumps_channel(state, bob), args.out)
    return EXIT_OK


def _parse_input(text: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"input must be two amplitudes a,b, got {text!r}")
    a, b = (complex(p.strip().replace(" ", "")) for p in parts)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-12:
        raise UsageError("input amplitudes are not normalized")
    return a, b


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def cmd_teleport(args) -> int:
    channel, bob = load_channel(args.channel)
    if args.bob is not None:
        bob = args.bob
    if args.random is not None:
        if args.random < 1:
            raise UsageError("--random needs a positive count")
        inputs = [tuple(v) for v in haar_inputs(args.random, args.seed)]
    else:
        inputs = [_parse_input(args.input or "1,0")]
    analysis = analyze_channel(channel, bob)
    scheme = prepare_scheme(channel, bob)
    runs = []
    for a, b in inputs:
        report = run_teleport(TeleportSetup(channel, bob, (a, b)), scheme)
        entry = {"input": [_cplx(a), _cplx(b)]}
        entry.update(report.to_dict())
        runs.append(entry)
    fids = [r["average_fidelity"] for r in runs]
    out = {
        "format": "magnon-teleport-report/1",
        "n_qubits": channel.n_qubits,
        "bob_qubit": bob,
        "verdict": analysis.verdict,
        "singular_values": analysis.singular_values[:4].tolist(),
        "input_averaged_fidelity": average_fidelity(channel, bob, scheme=scheme),
        "mean_fidelity_over_inputs": float(np.mean(fids)),
        "seed": args.seed if args.random is not None else None,
        "runs": runs,
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_decohere(args) -> int:
    channel, bob = load_channel(args.channel)
    if args.bob is not None:
        bob = args.bob
    taus = parse_list(args.tau)
    if len(taus) == 1:
        taus = taus * channel.n_qubits
    if len(taus) != channel.n_qubits:
        raise UsageError(f"{len(taus)} bath times for a {channel.n_qubits}-qubit channel")
    bath = BathSpec(tuple(taus))
    lo, hi, step = parse_window(args.window, args.step)
    if lo < 0:
        raise UsageError("times must be non-negative")
    times = grid(lo, hi, step)
    notes = [f"bath tau per site: {','.join(_fmt(t) for t in taus)}", f"bob qubit {bob}"]
    chunks = np.array_split(times, 8) if args.parallel else [times]
    fids = np.concatenate(
        _map(lambda ts: fidelity_vs_time(channel, bob, bath, ts).fidelities, chunks, args.parallel)
    )
    columns = ["t", "fidelity"]
    rows = zip(times, fids)
    if args.compare_ghz:
        if channel.n_qubits != 3:
            raise UsageError("--compare-ghz needs a three-qubit channel")
        cmp = compare_ghz_w(bath, times, bob=bob)
        ghz = cmp.ghz
        ahead = np.nonzero(fids > ghz + 1e-12)[0]
        first = _fmt(times[ahead[0]]) if ahead.size else "none"
        notes.append(f"first t where channel fidelity exceeds GHZ: {first}")
        columns.append("fidelity_ghz")
        rows = zip(times, fids, ghz)
    _write(_csv("decohere", notes, columns, rows), args.out)
    return EXIT_OK


def cmd_evolve(args) -> int:
    n = args.n
    theta = args.theta
    if n == 3 and args.delta is not None:
        amps = tri_evolve(theta, args.delta)
        delta = args.delta
    else:
        if args.delta not in (None, 1.0):
            raise UsageError("--delta applies to three sites only")
        if n < 2:
            raise UsageError("N must be at least 2")
        amps = ring_evolve(n, theta)
        delta = 1.0 if n == 3 else None
    cond = one_magnon_condition(amps, 1)
    out = {
        "format": "magnon-amplitudes/1",
        "n_sites": n,
        "delta": delta,
        "theta": theta,
        "amplitudes": [
            {"site": i + 1, "re": float(v.real), "im": float(v.imag), "modulus_sq": float(abs(v) ** 2), "phase": float(np.angle(v))}
            for i, v in enumerate(amps.values)
        ],
        "condition_residual": cond.residual,
        "condition_satisfied": cond.satisfied,
    }
    if n == 3:
        v = amps.values
        rel = float(np.angle(v[1] / v[0])) if abs(v[0]) > 0 and abs(v[1]) > 0 else None
        ref = REFERENCE_PHASES["phi2"] - REFERENCE_PHASES["phi1"]
        out["relative_phase_21"] = rel
        out["reference_phases"] = dict(REFERENCE_PHASES)
        out["reference_relative_phase_21"] = ref
        out["reference_phase_match"] = (
            rel is not None and min(abs((s * rel - ref + math.pi) % (2 * math.pi) - math.pi) for s in (1, -1)) < 1e-6
        )
    if n >= 2:
        out["large_N_return_probability"] = bessel_j0(theta) ** 2 if abs(theta) <= 50 else None
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="magnon-teleport", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-times", help="switch-off times of the exchange dynamics")
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--tri", action="store_true", help="three-site chain")
    mode.add_argument("--ring", action="store_true", help="N-site ring")
    s.add_argument("--n", default="3", help="ring size or 'inf'")
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--window", default="0:20")
    s.add_argument("--step", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve_times)

    s = sub.add_parser("fig2", help="three-site condition curves over theta")
    s.add_argument("--delta", default="1,0.75,0.5,0.25,0")
    s.add_argument("--window", default="0:20")
    s.add_argument("--step", type=float)
    s.add_argument("--out")
    s.add_argument("--parallel", action="store_true")
    s.set_defaults(func=cmd_fig2)

    s = sub.add_parser("fig3", help="ring condition curves over theta")
    s.add_argument("--n", default="3,10,50,500")
    s.add_argument("--window", default="0:20")
    s.add_argument("--step", type=float)
    s.add_argument("--out")
    s.add_argument("--parallel", action="store_true")
    s.set_defaults(func=cmd_fig3)

    s = sub.add_parser("build-channel", help="write a channel file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--magnons", type=int, default=1)
    s.add_argument("--bob", type=int)
    s.add_argument("--sign", choices=["+", "-"], default="+")
    s.add_argument("--profile", default="fourier", help="fourier, uniform, or comma-separated phases")
    s.add_argument("--kind", choices=["magnon", "ghz", "w-like", "symmetric-w"], default="magnon")
    s.add_argument("--out")
    s.set_defaults(func=cmd_build_channel)

    s = sub.add_parser("teleport", help="run the protocol through a channel file")
    s.add_argument("channel")
    s.add_argument("--input", help="amplitudes a,b (Python complex syntax)")
    s.add_argument("--random", type=int, help="number of Haar-random inputs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bob", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_teleport)

    s = sub.add_parser("decohere", help="fidelity under nuclear-spin baths")
    s.add_argument("channel")
    s.add_argument("--tau", default="1", help="bath time per site (one value broadcasts)")
    s.add_argument("--window", default="0:3")
    s.add_argument("--step", type=float, default=None)
    s.add_argument("--bob", type=int)
    s.add_argument("--compare-ghz", action="store_true")
    s.add_argument("--parallel", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_decohere)

    s = sub.add_parser("evolve", help="one-magnon amplitudes at time theta")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--delta", type=float)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_evolve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ChannelFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ProtocolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
