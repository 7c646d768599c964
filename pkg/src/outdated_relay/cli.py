"""``outdated-relay`` command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence,
3 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import e2e, mcsim, sweep, validation
from .config import GainConvention, SystemConfig
from .errors import InvalidInputError, NonConvergenceError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

_CONFIG_FLAGS = {
    "num_relays": int,
    "rho1": float,
    "rho2": float,
    "d1": float,
    "pathloss_exp": float,
    "eta1_db": float,
    "eta2_db": float,
    "rate": float,
    "noise_power": float,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is our non-convergence code
    def error(self, message):
        raise InvalidInputError(f"{self.prog}: {message}")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario (a --config file overrides these)")
    for name, typ in _CONFIG_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    g.add_argument("--gain-convention", dest="gain_convention", default=None,
                   choices=[c.value for c in GainConvention])
    g.add_argument("--config", metavar="FILE", help="JSON scenario document")


def _overrides(args) -> dict:
    """Scenario fields set on the command line, then by ``--config``."""
    out = {name: getattr(args, name) for name in (*_CONFIG_FLAGS, "gain_convention")
           if getattr(args, name) is not None}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise InvalidInputError(f"cannot read config {args.config!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config {args.config!r} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidInputError("config document must be a JSON object")
        SystemConfig.from_dict({**SystemConfig().to_dict(), **doc})  # rejects unknown keys
        out.update(doc)
    return out


def _config(args, base: SystemConfig | None = None) -> SystemConfig:
    base = base or SystemConfig()
    return SystemConfig.from_dict({**base.to_dict(), **_overrides(args)})


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _parse_grid(text: str) -> tuple[float, ...]:
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise InvalidInputError("grid step must be positive")
            n = int(round((stop - start) / step))
            return tuple(round(start + k * step, 12) for k in range(n + 1))
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise InvalidInputError(f"cannot parse grid {text!r}") from None


def _cmd_analyze(args) -> int:
    cfg = _config(args)
    derived, model = e2e.build_model(cfg)
    mod = e2e.modulation(args.modulation)
    doc = {
        "config": cfg.to_dict(),
        "sigma1": derived.sigma1,
        "sigma2": derived.sigma2,
        "C": derived.C,
        "Psi": derived.Psi,
        "outage": e2e.outage(model, derived.Psi),
        "ser": e2e.ser(model, mod),
        "modulation": mod.name,
        "mgf_s": args.mgf_s,
        "mgf": e2e.mgf(model, args.mgf_s),
    }
    _emit(json.dumps(doc, indent=2), args.output)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    extra = {"mc_trials": args.mc_trials, "seed": args.seed, "mgf_s": args.mgf_s}
    if args.preset:
        if args.axis or args.grid:
            raise InvalidInputError("--preset cannot be combined with --axis/--grid")
        preset = sweep.PRESETS[args.preset]()
        kw = {"metrics": tuple(args.metrics.split(",")) if args.metrics else preset.metrics,
              "modulation": args.modulation or preset.modulation}
        spec = dataclasses.replace(preset, base=_config(args, preset.base), **kw, **extra)
    else:
        if not (args.axis and args.grid):
            raise InvalidInputError("sweep needs --preset or both --axis and --grid")
        spec = sweep.SweepSpec(_config(args), sweep.Axis.parse(args.axis), _parse_grid(args.grid),
                               metrics=tuple((args.metrics or "outage").split(",")),
                               modulation=args.modulation or "BPSK", **extra)
    rows = sweep.run_sweep(spec, threads=args.threads)
    text = sweep.rows_to_json(rows, spec) if args.json else sweep.rows_to_csv(rows, spec)
    _emit(text, args.output)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    derived = e2e.derived_for(cfg)
    mod = e2e.modulation(args.modulation)
    workers = args.threads or sweep.default_threads()
    out = mcsim.estimate_outage(cfg, derived.Psi, args.trials, args.seed, args.stream_id,
                                derived, workers)
    ser = mcsim.estimate_ser(cfg, mod, args.trials, args.seed, args.stream_id, derived, workers)
    doc = {
        "config": cfg.to_dict(),
        "trials": args.trials,
        "seed": args.seed,
        "stream_id": args.stream_id,
        "rng": mcsim.RNG_METHOD,
        "C": derived.C,
        "Psi": derived.Psi,
        "outage": out.value,
        "outage_se": out.std_error,
        "modulation": mod.name,
        "ser": ser.value,
        "ser_se": ser.std_error,
    }
    _emit(json.dumps(doc, indent=2), args.output)
    return EXIT_OK


def _cmd_validate(args) -> int:
    report = validation.run_validation(fault=args.fault, mc_trials=args.mc_trials, seed=args.seed)
    _emit(report.to_json() if args.json else report.summary(), args.output)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_table(args) -> int:
    _emit(sweep.dump_table(_config(args)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="outdated-relay",
                     description="Two-way fixed-gain AF relay selection with outdated CSI.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="all analytic metrics at one point")
    _add_config_flags(p)
    p.add_argument("--modulation", default="BPSK")
    p.add_argument("--mgf-s", type=float, default=1.0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="analytic (and MC) curves over one parameter")
    _add_config_flags(p)
    p.add_argument("--preset", choices=sorted(sweep.PRESETS))
    p.add_argument("--axis", help="D1, Eta1Db, Rho1, Rho2 or NumRelays")
    p.add_argument("--grid", help="comma list or start:stop:step")
    p.add_argument("--metrics", help="comma subset of outage,ser,mgf")
    p.add_argument("--modulation")
    p.add_argument("--mc-trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mgf-s", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default ${sweep.THREADS_ENV} or 1)")
    p.add_argument("--json", action="store_true", help="emit a JSON array instead of CSV")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("simulate", help="Monte-Carlo estimates only")
    _add_config_flags(p)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream-id", type=int, default=0)
    p.add_argument("--modulation", default="BPSK")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate", help="run the self-check suite")
    p.add_argument("--fault", choices=validation.FAULTS)
    p.add_argument("--mc-trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("table", help="dump the coefficient table and term set as JSON")
    _add_config_flags(p)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_table)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NonConvergenceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
