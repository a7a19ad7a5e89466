"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from collections.abc import Sequence
from typing import TextIO

import numpy as np

from . import checks
from .bb84 import Bb84Config, simulate, summarize
from .noise import FixedNoise, NoiseParams, SlowDrift, UniformAngles
from .postselect import MID_KEYS, sweep
from .network import DEFAULT_LAYOUT, transmit
from .state import QubitState, StateError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2

SWEEP_HEADER = ["theta", "phi", "p_success", "min_fidelity", *MID_KEYS, "p_rejected"]


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """12 significant digits, with negative zero folded to zero."""
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def qubit_from_args(args: argparse.Namespace) -> QubitState:
    """alpha|H> + beta|V>, normalized; the zero vector is rejected."""
    try:
        return QubitState.from_vector([args.alpha, args.beta])
    except StateError as exc:
        raise UsageError(f"invalid qubit: {exc}") from None


def noise_from_args(args: argparse.Namespace) -> NoiseParams | None:
    """Noise pair from --theta/--phi or the raw --delta-*/--eta-* flags."""
    raw = [args.delta_re, args.delta_im, args.eta_re, args.eta_im]
    angles = [args.theta, args.phi]
    if any(x is not None for x in raw):
        if any(x is not None for x in angles):
            raise UsageError("give either --theta/--phi or --delta-*/--eta-*, not both")
        dr, di, er, ei = (0.0 if x is None else x for x in raw)
        delta, eta = complex(dr, di), complex(er, ei)
        norm2 = abs(delta) ** 2 + abs(eta) ** 2
        if abs(norm2 - 1.0) > 1e-9:
            raise UsageError(f"|delta|^2 + |eta|^2 = {norm2:.12g}, expected 1")
        scale = math.sqrt(norm2)
        return NoiseParams(delta / scale, eta / scale)
    if any(x is not None for x in angles):
        return NoiseParams.from_angles(args.theta or 0.0, args.phi or 0.0)
    return None


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("noise (delta = cos theta, eta = exp(i phi) sin theta)")
    g.add_argument("--theta", type=float)
    g.add_argument("--phi", type=float)
    for name in ("delta-re", "delta-im", "eta-re", "eta-im"):
        g.add_argument(f"--{name}", type=float)


def _add_qubit_flags(p: argparse.ArgumentParser, alpha: str, beta: str) -> None:
    p.add_argument("--alpha", type=_complex, default=_complex(alpha),
                   help="H amplitude, e.g. 0.6 or 0.5+0.5j (normalized with beta)")
    p.add_argument("--beta", type=_complex, default=_complex(beta))


def _open_out(path: str | None) -> TextIO:
    if path is None:
        return sys.stdout
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    layout = checks.CorruptedLayout() if args.corrupt else DEFAULT_LAYOUT
    results = checks.run_all(seed=args.seed, layout=layout)
    for c in results:
        print(c.line(), file=out)
    failed = [c.name for c in results if not c.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=out)
        return EXIT_CHECK_FAILED
    print(f"all {len(results)} checks passed", file=out)
    return EXIT_OK


def write_sweep_csv(records, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in records:
        w.writerow([fmt(x) for x in r.row()])


def cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    if args.format != "csv":
        raise UsageError("sweep writes csv only")
    if args.grid < 1:
        raise UsageError("--grid must be >= 1")
    q = qubit_from_args(args)
    thetas = np.linspace(0.0, math.pi / 2, args.grid)
    phis = np.linspace(0.0, 2 * math.pi, args.grid, endpoint=False)
    records = sweep(thetas, phis, q, args.recovery)
    stream = _open_out(args.out)
    try:
        write_sweep_csv(records, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


def trace_rows(q: QubitState, p: NoiseParams) -> list[tuple[int, str, str, int, float, float]]:
    ports = DEFAULT_LAYOUT.output_ports
    rows = []
    for label, amp in transmit(q, p, p).items():
        channel, port = ports[label.spatial]
        rows.append((channel, port, label.pol.value, label.time, amp.real, amp.imag))
    return sorted(rows, key=lambda r: (r[0], r[1], r[3], r[2]))


def cmd_trace(args: argparse.Namespace, out: TextIO) -> int:
    q = qubit_from_args(args)
    p = noise_from_args(args) or NoiseParams.from_angles(0.6, 0.9)
    print("channel\tport\tpol\ttime\tre\tim", file=out)
    for ch, port, pol, t, re, im in trace_rows(q, p):
        print(f"{ch}\t{port}\t{pol}\t{t}\t{fmt(re)}\t{fmt(im)}", file=out)
    return EXIT_OK


def cmd_bb84(args: argparse.Namespace, out: TextIO) -> int:
    if args.out is not None and args.format != "jsonl":
        raise UsageError("the per-photon log is written as jsonl")
    fixed = noise_from_args(args)
    if fixed is not None:
        model = FixedNoise(fixed)
    elif args.noise_model == "drift":
        model = SlowDrift(args.drift_rate)
    elif args.noise_model == "fixed":
        raise UsageError("--noise-model fixed needs --theta/--phi or --delta-*/--eta-*")
    else:
        model = UniformAngles()
    log = _open_out(args.out) if args.out is not None else None
    try:
        for protected in (True, False):
            cfg = Bb84Config(args.n_photons, model, args.seed, args.recovery, protected)
            events = simulate(cfg)
            if log is not None:
                events = _logged(events, log, "protected" if protected else "unprotected")
            stats = summarize(events)
            name = "protected" if protected else "unprotected"
            print(f"{name}: accepted_fraction={fmt(stats.accepted_fraction)} "
                  f"sifted_fraction={fmt(stats.sifted_fraction)} qber={fmt(stats.qber)} "
                  f"qber_x={fmt(stats.qber_by_basis['X'])} "
                  f"qber_y={fmt(stats.qber_by_basis['Y'])} "
                  f"n_sifted={stats.n_sifted}", file=out)
    finally:
        if log is not None:
            log.close()
    return EXIT_OK


def _logged(events, log: TextIO, run: str):
    for ev in events:
        log.write(json.dumps({"run": run, **ev.to_json()}, sort_keys=True) + "\n")
        yield ev


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timebin-rejection",
        description="Time-bin collective-noise rejection: checks, sweeps, traces, BB84.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the numerical verification suite")
    p.add_argument("--seed", type=int, default=2007)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="success probability over a noise-angle grid")
    p.add_argument("--grid", type=int, default=9, help="points per axis")
    _add_qubit_flags(p, "1", "1j")
    p.add_argument("--recovery", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="print every output amplitude")
    _add_qubit_flags(p, "1", "1j")
    _add_noise_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("bb84", help="BB84 session with and without the device")
    p.add_argument("--n-photons", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--recovery", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--noise-model", choices=["uniform", "drift", "fixed"], default="uniform")
    p.add_argument("--drift-rate", type=float, default=0.05)
    _add_noise_flags(p)
    p.add_argument("--out", help="per-photon log")
    p.add_argument("--format", choices=["csv", "jsonl"], default="jsonl")
    p.set_defaults(func=cmd_bb84)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out or sys.stdout)
    except (UsageError, ValueError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
