"""Run every verification scenario and the fault injections, printing one line each.

    python scripts/run_all_scenarios.py [--samples N] [--seed S] [--outdir DIR]
"""

import argparse
import pathlib

from cartan_kit import scenarios as S


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--outdir", default=None)
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir) if args.outdir else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)

    runs = [(name, None) for name in S.SCENARIOS]
    runs += [("sphere-frame", "non-equivariant-iso"), ("torus-frame", "indefinite-metric"), ("sphere-frame", "broken-cocycle")]
    for name, inject in runs:
        cfg = S.ScenarioConfig(name, args.samples, args.seed, inject=inject)
        rep = S.run_verify(cfg)
        label = name if inject is None else f"{name} +{inject}"
        failed = rep.failures()
        status = "PASS" if not failed else f"FAIL at [{failed[0].stage}] {failed[0].name} ({failed[0].ref})"
        print(f"{label:42s} {len(rep.records):3d} checks {rep.runtime:6.2f}s  {status}")
        if outdir:
            stem = name if inject is None else f"{name}__{inject}"
            (outdir / f"{stem}.json").write_text(rep.to_json())


if __name__ == "__main__":
    main()
