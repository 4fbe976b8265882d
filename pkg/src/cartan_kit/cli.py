"""Command-line entry point: ``cartan-kit verify | obstruction | list-scenarios``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
configuration or output errors. Reports are JSON with sorted keys and no
timing data, so identical configurations give byte-identical files; pass
``--timing`` to print the runtime on stderr.
"""

from __future__ import annotations

import argparse
import sys

from . import config, scenarios
from .report import VerificationReport

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parse_tol(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise scenarios.ConfigError(f"--tol expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise scenarios.ConfigError(f"--tol {name}: {value!r} is not a number") from None
    return out


def _tolerances(args) -> config.Tolerances:
    try:
        base = config.get_profile(args.profile)
        return base.with_overrides(_parse_tol(args.tol))
    except KeyError as exc:
        raise scenarios.ConfigError(exc.args[0]) from None


def _add_common(p: argparse.ArgumentParser, default_scenario: str | None) -> None:
    p.add_argument("--scenario", default=default_scenario, required=default_scenario is None, help="scenario id (see list-scenarios)")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override one tolerance; repeatable")
    p.add_argument("--profile", default=None, help=f"tolerance profile ({', '.join(config.PROFILES)}); default from ${config.PROFILE_ENV_VAR}")
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="print runtime on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cartan-kit", description="Sample-based verification of bundle, connection and Cartan-geometry axioms.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a scenario's verification suite and the equivalence chain")
    _add_common(v, None)
    v.add_argument("--samples", type=int, default=200)
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--inject", default=None, choices=scenarios.INJECTIONS, help="deliberately break one input")

    o = sub.add_parser("obstruction", help="Euler-number obstruction for the trivial SO(2)-bundle over S^2")
    _add_common(o, "trivial-so2-sphere")

    sub.add_parser("list-scenarios", help="list scenario ids")
    return parser


def _emit(report: VerificationReport, out: str | None, timing: bool) -> int:
    text = report.to_json()
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cartan-kit: cannot write report: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    failed = report.failures()
    status = "PASS" if not failed else f"FAIL ({len(failed)} check(s), first: [{failed[0].stage}] {failed[0].name})"
    line = f"{report.scenario}: {status}"
    if timing and report.runtime is not None:
        line += f" in {report.runtime:.2f}s"
    print(line, file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, text in scenarios.describe().items():
            print(f"{name}\t{text}")
        return EXIT_PASS
    try:
        tol = _tolerances(args)
        if args.command == "verify":
            cfg = scenarios.ScenarioConfig(args.scenario, args.samples, args.seed, tol, args.out, args.inject)
            report = scenarios.run_verify(cfg)
        else:
            cfg = scenarios.ScenarioConfig(args.scenario, tol=tol, out=args.out)
            report = scenarios.run_obstruction(cfg)
    except scenarios.ConfigError as exc:
        print(f"cartan-kit: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _emit(report, args.out, args.timing)


if __name__ == "__main__":
    sys.exit(main())
