"""Command line entry point: ``info``, ``decode`` and ``simulate``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import erasure
from .codes import FAMILIES, SOLID, WELDED, PauliFrame, build_code, syndrome
from .harness import (ConfigError, SimConfig, _classify, _decode, baseline_path, format_csv,
                      run_sweep)
from .noise import BITFLIP, CHANNELS, ERASURE, PHASEFLIP

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _add_code_args(p):
    p.add_argument("--family", choices=FAMILIES, default=SOLID)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--R", type=int, default=1)


def _add_decoder_args(p):
    p.add_argument("--imax", type=int, default=None, help="Toom outer iterations (default ceil(ell/2))")
    p.add_argument("--jmax", type=int, default=None, help="Toom sweeps per rule (default ell)")
    p.add_argument("--stuck-policy", choices=erasure.STUCK_POLICIES, default=None,
                   help="what the X erasure decoder does when trapping stalls")
    p.add_argument("--variant", choices=erasure.VARIANTS, default=erasure.FREEZE_FIRST,
                   help="Z erasure decoder ordering")


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, not argparse's default code 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="toric3d", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    info = sub.add_parser("info", help="print code parameters")
    _add_code_args(info)
    info.add_argument("--dump-lattice", action="store_true", help="print every lattice element")
    info.add_argument("--export", metavar="DIR", help="write H, T and logicals as sparse rows")

    dec = sub.add_parser("decode", help="decode one error or erasure pattern from a file")
    _add_code_args(dec)
    dec.add_argument("--channel", choices=CHANNELS, default=PHASEFLIP)
    dec.add_argument("input", help="lines 'x: i j ...', 'z: ...', 'erased: ...' or bare indices")
    _add_decoder_args(dec)

    sim = sub.add_parser("simulate", help="Monte Carlo sweep written as CSV")
    _add_code_args(sim)
    sim.add_argument("--channel", choices=CHANNELS, default=PHASEFLIP)
    sim.add_argument("--p-min", type=float, default=0.01)
    sim.add_argument("--p-max", type=float, default=0.05)
    sim.add_argument("--p-steps", type=int, default=5)
    sim.add_argument("--trials", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    sim.add_argument("--paired-baseline", action="store_true",
                     help="also decode every sample by elimination; writes <out>.gauss.csv")
    sim.add_argument("--timing", action="store_true", help="record wall time in elapsed_ms")
    _add_decoder_args(sim)
    return ap


def _code(args):
    if args.family != WELDED and args.R != 1:
        raise ConfigError("--R applies to the welded family only")
    try:
        return build_code(args.family, args.ell, args.R)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_info(args) -> int:
    code = _code(args)
    w = code.logical_weights()
    print(f"family      {code.family}")
    print(f"params      {code.params}")
    print(f"n           {code.n}")
    print(f"k           {code.k}")
    print(f"x_checks    {code.num_xchecks} (rank {code.rank_H})")
    print(f"z_checks    {code.num_zchecks} (rank {code.rank_T})")
    print(f"logical_x   weights {w['x']}")
    print(f"logical_z   weights {w['z']}")
    if args.dump_lattice:
        print("\n".join(code.lattice.dump()))
    if args.export:
        for path in code.export(args.export):
            print(f"wrote {path}")
    return EXIT_OK


def parse_pattern(text: str, channel: str, n: int) -> tuple[PauliFrame, np.ndarray | None]:
    """Read ``x:``/``z:``/``erased:`` lines; bare indices follow the channel."""
    sets = {"x": set(), "z": set(), "erased": set()}
    bare = {BITFLIP: "x", PHASEFLIP: "z", ERASURE: "erased"}[channel]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        if rest or line.endswith(":"):
            key = key.strip().lower()
            if key not in sets:
                raise ConfigError(f"unknown line tag {key!r}")
        else:
            key, rest = bare, line
        for tok in rest.replace(",", " ").split():
            q = int(tok)
            if not 0 <= q < n:
                raise ConfigError(f"qubit index {q} out of range 0..{n - 1}")
            sets[key].add(q)
    frame = PauliFrame.zeros(n)
    frame.x[list(sets["x"])] = 1
    frame.z[list(sets["z"])] = 1
    if channel != ERASURE:
        return frame, None
    erased = np.zeros(n, dtype=bool)
    erased[list(sets["erased"] | sets["x"] | sets["z"])] = True
    return frame, erased


def cmd_decode(args) -> int:
    code = _code(args)
    cfg = SimConfig(family=args.family, ell=args.ell, R=args.R, channel=args.channel,
                    p_min=0.0, p_max=0.0, p_steps=1, trials=1, imax=args.imax, jmax=args.jmax,
                    stuck_policy=args.stuck_policy, variant=args.variant).validate()
    with open(args.input) as fh:
        text = fh.read()
    try:
        error, erased = parse_pattern(text, args.channel, code.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    s = syndrome(code, error)
    x_est, z_est = _decode(code, cfg, error, erased)
    print(f"sigma       {np.flatnonzero(s.sigma).tolist()}")
    print(f"tau         {np.flatnonzero(s.tau).tolist()}")
    for name, est in (("x_estimate", x_est), ("z_estimate", z_est)):
        print(f"{name:<11} {'FAILED' if est is None else np.flatnonzero(est).tolist()}")
    print(f"outcome     {_classify(code, error, x_est, z_est)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = SimConfig(family=args.family, ell=args.ell, R=args.R, channel=args.channel,
                    p_min=args.p_min, p_max=args.p_max, p_steps=args.p_steps,
                    trials=args.trials, seed=args.seed, workers=args.workers, out=args.out,
                    imax=args.imax, jmax=args.jmax, stuck_policy=args.stuck_policy,
                    variant=args.variant, paired_baseline=args.paired_baseline,
                    timing=args.timing).validate()
    if cfg.paired_baseline and not cfg.out:
        raise ConfigError("--paired-baseline needs --out")
    results, _ = run_sweep(cfg)
    if cfg.out:
        print(f"wrote {cfg.out}")
        if cfg.paired_baseline:
            print(f"wrote {baseline_path(cfg.out)}")
    else:
        sys.stdout.write(format_csv(results, cfg.timing))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"info": cmd_info, "decode": cmd_decode, "simulate": cmd_simulate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
