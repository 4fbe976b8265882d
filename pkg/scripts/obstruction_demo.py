"""Euler numbers of the oriented frame bundle of S^2 and of the trivial SO(2)-bundle.

A soldering form on S^2 x SO(2) would identify the trivial plane bundle with TS^2,
which is impossible because their Euler numbers are 2 and 0.
"""

from cartan_kit import scenarios as S

if __name__ == "__main__":
    rep = S.run_obstruction(S.ScenarioConfig("trivial-so2-sphere"))
    for r in rep.records:
        print(f"{'ok ' if r.passed else 'BAD'} {r.name:55s} {r.note}")
    print(rep.extras["verdict"])
    print(f"runtime {rep.runtime:.1f}s")
