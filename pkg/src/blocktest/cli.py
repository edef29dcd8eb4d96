"""Command line: ``blocktest test|gen|sweep``.

Exit status is 0 on completion, 2 on capability errors.  ``--config FILE``
reads flat ``key=value`` lines whose keys mirror the long flags; explicit
flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import CLASSES, ExperimentConfig, InstanceSpec, generate_instance, run_experiment
from .bits import CapabilityError, UsageError
from .functions import dumps


def read_config(path: str) -> dict[str, str]:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line without '=': {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("cls", choices=CLASSES, help="function class")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--far", type=float, nargs="?", const=-1.0, default=None,
                   help="certified-far instance at distance >= gamma (default gamma = eps)")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None, help="flat key=value file mirroring the flags")


def _experiment(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=1 / 20)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--preset", default="result3")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--transcripts", default=None, help="directory for JSON-lines query transcripts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blocktest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("test", help="run a tester on a generated instance")
    _common(t)
    _experiment(t)
    g = sub.add_parser("gen", help="write a generated instance in the function file format")
    _common(g)
    g.add_argument("--eps", type=float, default=0.1)
    w = sub.add_parser("sweep", help="run a tester over an eps grid")
    _common(w)
    _experiment(w)
    w.add_argument("--grid", default="eps=0.1,0.05", help="eps=v1,v2,...")
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        defaults = {}
        for action in parser._subparsers._group_actions[0].choices[args.command]._actions:
            if action.dest in cfg:
                raw = cfg[action.dest]
                defaults[action.dest] = action.type(raw) if action.type else raw
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _spec(args) -> InstanceSpec:
    far = None if args.far is None else (args.eps if args.far < 0 else args.far)
    return InstanceSpec(args.cls, args.n, args.k, args.s, args.d, far)


def parse_grid(text: str) -> tuple[float, ...]:
    key, _, values = text.partition("=")
    if key.strip() != "eps" or not values:
        raise UsageError("grid must look like eps=0.1,0.05")
    return tuple(float(v) for v in values.split(","))


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        spec = _spec(args)
        if args.command == "gen":
            inst = generate_instance(spec, args.seed)
            text = dumps(inst.f)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            if inst.distance is not None and spec.far is not None:
                print(f"# certified distance {inst.distance}", file=sys.stderr)
            return 0
        grid = parse_grid(args.grid) if args.command == "sweep" else (args.eps,)
        cfg = ExperimentConfig(spec, args.trials, args.seed, grid, args.eta, args.preset, args.workers,
                               args.out, args.transcripts)
        report = run_experiment(cfg)
        if not args.out:
            sys.stdout.write(report.to_csv())
        return 0
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
