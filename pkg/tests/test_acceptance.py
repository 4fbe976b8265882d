"""Acceptance criteria, one test per criterion.

Each test prints ``PASS criterion N: ...`` or ``FAIL criterion N: ...``; the
lines are also collected and shown in the terminal summary.
"""

import time

import numpy as np
import pytest

from cartan_kit import cartan as K
from cartan_kit import refs
from cartan_kit import scenarios as S
from cartan_kit.scenarios import ScenarioConfig

from conftest import ACCEPTANCE_LINES

SAMPLES = 200
SCENARIO_BUDGET = 10.0
OBSTRUCTION_BUDGET = 30.0


def _run(name, **kw):
    t0 = time.perf_counter()
    report = S.run_verify(ScenarioConfig(name, samples=SAMPLES, **kw))
    return report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def torus_run():
    return _run("torus-frame")


@pytest.fixture(scope="module")
def sphere_run():
    return _run("sphere-frame")


@pytest.fixture(scope="module")
def homogeneous_run():
    return _run("sphere-homogeneous")


@pytest.fixture(scope="module")
def obstruction_run():
    t0 = time.perf_counter()
    report = S.run_obstruction(ScenarioConfig("trivial-so2-sphere"))
    return report, time.perf_counter() - t0


def _verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def _worst(report, ref, stage=None):
    recs = [r for r in report.records if r.ref == ref and (stage is None or r.stage == stage)]
    assert recs, f"no records with ref {ref!r}"
    return recs


def test_criterion_1_ehresmann(torus_run, sphere_run):
    parts, ok = [], True
    for label, (rep, secs) in (("torus", torus_run), ("sphere", sphere_run)):
        eq = max(r.max_residual for r in _worst(rep, refs.EHRESMANN_EQUIV))
        rp = max(r.max_residual for r in _worst(rep, refs.EHRESMANN_REPRO))
        good = eq < 1e-6 and rp < 1e-9 and secs < SCENARIO_BUDGET and rep.extras["samples"] >= 200
        ok &= good
        parts.append(f"{label} equiv {eq:.1e} repro {rp:.1e} {secs:.1f}s")
    assert _verdict(1, ok, "; ".join(parts))


def test_criterion_2_soldering(torus_run, sphere_run):
    parts, ok = [], True
    for label, (rep, _) in (("torus", torus_run), ("sphere", sphere_run)):
        tens = max(r.max_residual for r in rep.records if r.stage == "connection" and r.ref in (refs.PSEUDOTENSORIAL, refs.HORIZONTAL))
        sig = min(r.max_residual for r in _worst(rep, refs.SOLDERING))
        good = tens < 1e-8 and sig > 1e-6
        ok &= good
        parts.append(f"{label} tensorial {tens:.1e} sigma_min {sig:.3f}")
    assert _verdict(2, ok, "; ".join(parts))


def test_criterion_3_chain(torus_run, sphere_run):
    parts, ok = [], True
    for label, (rep, _) in (("torus", torus_run), ("sphere", sphere_run)):
        det = rep.find("omega_p isomorphism (|det|)")
        eq = rep.find("Cartan equivariance")
        stage_iv = [r for r in rep.records if r.stage == K.STAGE_IV_III]
        rp = [r for r in stage_iv if r.ref == refs.CARTAN_REPRO][0]
        dim = rep.find("dim g = dim P")
        rec = rep.find("omega_g/h recovers theta")
        good = (
            det.max_residual > 1e-8
            and eq.max_residual < 1e-6
            and rp.max_residual < 1e-9
            and dim.passed
            and rep.extras["dim_g"] == rep.extras["dim_P"]
            and rec.max_residual < 1e-9
            and all(r.passed for r in rep.records if r.stage in (K.STAGE_V_IV, K.STAGE_IV_III))
        )
        ok &= good
        parts.append(f"{label} |det| {det.max_residual:.3f} equiv {eq.max_residual:.1e} repro {rp.max_residual:.1e} theta {rec.max_residual:.1e}")
    assert _verdict(3, ok, "; ".join(parts))


def test_criterion_4_form_identification(torus_run, sphere_run, homogeneous_run):
    parts, ok = [], True
    for label, (rep, _) in (("torus", torus_run), ("sphere", sphere_run), ("homogeneous", homogeneous_run)):
        rt = max(r.max_residual for r in rep.records if r.stage == "forms" and r.ref == refs.LEMMA_1_8)
        ident = [r for r in rep.records if r.stage == "forms" and r.name == "identity section of End TM"][0]
        good = rt < 1e-9 and ident.max_residual < 1e-9
        ok &= good
        parts.append(f"{label} round-trip {rt:.1e} identity {ident.max_residual:.1e}")
    assert _verdict(4, ok, "; ".join(parts))


def test_criterion_5_section_and_reduction_cycles(torus_run, sphere_run):
    parts, ok = [], True
    for label, (rep, _) in (("torus", torus_run), ("sphere", sphere_run)):
        l11 = max(r.max_residual for r in _worst(rep, refs.LEMMA_1_1))
        t14 = [r for r in _worst(rep, refs.THEOREM_1_4) if r.name != "cycle membership agreement"]
        agree = rep.find("cycle membership agreement")
        worst14 = max(r.max_residual for r in t14)
        good = l11 < 1e-9 and worst14 < 1e-9 and agree.max_residual == 0.0 and rep.extras["samples"] >= 200
        ok &= good
        parts.append(f"{label} sections {l11:.1e} reduction {worst14:.1e}")
    assert _verdict(5, ok, "; ".join(parts))


def test_criterion_6_homogeneous_flatness(homogeneous_run):
    rep, secs = homogeneous_run
    rec = [r for r in rep.records if r.ref == refs.CURVATURE][0]
    ok = rec.max_residual < 1e-5 and S.CURVATURE_SAMPLES >= 100 and rep.passed
    assert _verdict(6, ok, f"curvature {rec.max_residual:.1e} over {S.CURVATURE_SAMPLES} triples, {secs:.1f}s")


def test_criterion_7_obstruction(obstruction_run):
    rep, secs = obstruction_run
    chi = rep.extras["euler_TS2"]
    triv = rep.extras["euler_trivial"]
    violated = rep.find("soldering condition violated (Euler numbers differ)")
    ok = abs(chi - 2) < 1e-3 and abs(triv) < 1e-6 and violated.passed and "unsatisfiable" in rep.extras["verdict"] and secs < OBSTRUCTION_BUDGET
    assert _verdict(7, ok, f"chi(TS^2) {chi:.6f}, trivial {triv:.1e}, '{rep.extras['verdict']}', {secs:.1f}s")


INJECTED = [
    ("non-equivariant-iso", "sphere-frame", K.STAGE_V_IV, refs.PSEUDOTENSORIAL),
    ("indefinite-metric", "torus-frame", "metric", refs.METRIC_PD),
    ("broken-cocycle", "sphere-frame", "bundle", refs.COCYCLE),
]


def test_criterion_8_fault_injection():
    parts, ok = [], True
    for inject, scenario, stage, ref in INJECTED:
        rep, _ = _run(scenario, inject=inject)
        first = rep.failures()[0] if rep.failures() else None
        good = (
            not rep.passed
            and first is not None
            and first.stage == stage
            and first.ref == ref
            and rep.extras.get("rejected_at_stage") == stage
        )
        ok &= good
        parts.append(f"{inject} -> {first.stage if first else 'accepted'}")
    assert _verdict(8, ok, "; ".join(parts))


def test_scenario_runtimes(torus_run, sphere_run, homogeneous_run):
    for rep, secs in (torus_run, sphere_run, homogeneous_run):
        assert rep.passed
        assert secs < SCENARIO_BUDGET, f"{rep.scenario} took {secs:.1f}s"
