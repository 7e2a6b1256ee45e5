"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria run through the same experiment drivers as the CLI, at their stated
tolerances (no looser).  Oracles behind the expected values: closed forms are
verified against the defining equations at construction time (catalog
oracles), finite differences back every exact gradient, and the rotation and
level-set laws are checked against independent quadrature of the bump.
"""

import math

import numpy as np
import pytest

from srl.cli import ExperimentConfig, run, verify_suite

SEED = 20240817


def _cfg(tmp, **kw):
    kw.setdefault("seed", SEED)
    return ExperimentConfig(out=str(tmp), **kw)


def _named(report, *names):
    got = {c.name: c for c in report.checks}
    return [got[n] for n in names]


def _announce(criterion, checks):
    ok = all(c.passed for c in checks)
    worst = max((abs(c.measured) for c in checks if math.isfinite(c.measured)),
                default=float("nan"))
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} "
          f"(worst measured {worst:.3g})")
    return ok


@pytest.fixture(scope="module")
def verify_forms_report(tmp_path_factory):
    return run("verify-forms", _cfg(tmp_path_factory.mktemp("vf")))


@pytest.fixture(scope="module")
def bubble_report(tmp_path_factory):
    return run("bubble", _cfg(tmp_path_factory.mktemp("bub")))


@pytest.fixture(scope="module")
def bhopf_report(tmp_path_factory):
    return run("bhopf", _cfg(tmp_path_factory.mktemp("bh")))


def test_acceptance_01_volume_coefficient(verify_forms_report):
    checks = _named(verify_forms_report, "bubble_volume_coefficient")
    assert _announce("01 contact volume coefficient (1e-9, 1000 pts)", checks)
    assert checks[0].measured <= 1e-9


def test_acceptance_02_reeb_solver_vs_closed_forms(bubble_report, bhopf_report):
    checks = _named(bubble_report, "reeb_matches_closed_form",
                    "reeb_residual_alpha", "reeb_residual_dalpha")
    checks += _named(bhopf_report, "sphere_reeb_closed_form")
    assert _announce("02 Reeb solves vs closed forms (1e-9, 500 pts each)", checks)
    for c in checks:
        assert c.measured <= 1e-9


def test_acceptance_03_on_z_hamiltonian_identity(verify_forms_report):
    checks = _named(verify_forms_report, "onz_hamiltonian_identity_bubble",
                    "onz_hamiltonian_identity_oscillator")
    assert _announce("03 on-Z Hamiltonian identity (1e-8, 200 pts)", checks)
    for c in checks:
        assert c.measured <= 1e-8


def test_acceptance_04_conservation(bubble_report, bhopf_report):
    checks = _named(bubble_report, "first_integral_drift")
    checks += _named(bhopf_report, "energy_drift")
    assert _announce("04 first-integral drift (1e-8, horizon 100)", checks)
    for c in checks:
        assert c.measured <= 1e-8


def test_acceptance_05_stereographic_consistency(bhopf_report):
    checks = _named(bhopf_report, "stereographic_consistency")
    assert _announce("05 projection consistency (1e-8, 200 pts)", checks)
    assert checks[0].measured <= 1e-8


def test_acceptance_06_foliation_generators(tmp_path):
    report = run("foliation", _cfg(tmp_path))
    checks = [c for c in report.checks if c.name.startswith("system_")]
    assert len(checks) == 4  # both kinds, R in {1.2, 2}
    assert _announce("06 foliation generators (1e-10, 200 pts)", checks)
    for c in checks:
        assert c.measured <= 1e-10


def test_acceptance_07_bubble_taxonomy(bubble_report):
    checks = _named(bubble_report, "axis_seed_singular_periodic",
                    "interior_seeds_generalized", "exterior_seeds_escape",
                    "no_periodic_orbits")
    assert _announce("07 orbit taxonomy (axis + 20 interior + 10 exterior)",
                     checks)


def test_acceptance_08_rotation_scaling_law(tmp_path):
    report = run("break-scaling", _cfg(tmp_path))
    checks = [c for c in report.checks if c.name.startswith("rotation_")]
    assert _announce("08 rotation law (each eps 10%, slope 5%)", checks)
    slope = next(c for c in checks if c.name == "rotation_slope")
    assert abs(slope.measured - slope.expected) <= 0.05 * slope.expected


def test_acceptance_09_counterexample(tmp_path):
    report = run("counterexample", _cfg(tmp_path, eps=1e-2, seeds=100))
    checks = _named(report, "no_singular_periodic", "no_periodic_off_z",
                    "former_axis_reclassified", "quasi_closed_tally")
    assert _announce("09 perturbed flow: no singular periodic, no periodic, "
                     "quasi-closed tally", checks)


def test_acceptance_10_level_family_closed_form(tmp_path):
    report = run("seifert", _cfg(tmp_path))
    checks = _named(report, "orbit_components", "energy_coordinate_returns",
                    "rotation_constant")
    assert _announce("10 level-family closed form (1e-6 / 1e-8 / 1%)", checks)
    assert checks[0].measured <= 1e-6
    assert checks[1].measured <= 1e-8


def test_acceptance_11_separatrix_count(tmp_path):
    report = run("torus-separatrix", _cfg(tmp_path))
    checks = _named(report, "separatrix_count", "all_homoclinic")
    assert _announce("11 separatrix count = 4 = 2 b1", checks)
    assert checks[0].measured == 4.0


def test_acceptance_12_determinism(tmp_path):
    r1 = verify_suite(_cfg(tmp_path / "a"))
    r2 = verify_suite(_cfg(tmp_path / "b"))
    b1 = (tmp_path / "a" / "report-verify.json").read_bytes()
    b2 = (tmp_path / "b" / "report-verify.json").read_bytes()
    ok = b1 == b2 and r1.passed and r2.passed
    print(f"ACCEPTANCE 12: {'PASS' if ok else 'FAIL'} "
          f"(reports {len(b1)} bytes, identical = {b1 == b2})")
    assert ok
