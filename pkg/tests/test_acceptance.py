"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured quantity at its pinned tolerance."""

import itertools
import json
import math
import time

import numpy as np

from fixturegen import (
    blob_scores,
    composite_fixture,
    noise_matrix,
    pam_oracle_instance,
    planted_two_factor_matrix,
    write_composite,
)
from taskrisk.adequacy import CorrelationMatrix, bartlett_test, kmo
from taskrisk.clustering import dissimilarity_matrix, pam, silhouette
from taskrisk.config import load_config
from taskrisk.factors import extract_paf, fit_indices, parallel_analysis, varimax
from taskrisk.pipeline import run_pipeline
from taskrisk.tables import read_table
from taskrisk.vulnerability import SusceptibilityCriterion, score_criteria


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


def plain_r(values):
    values = np.asarray(values, dtype=float)
    return CorrelationMatrix(tuple(f"a{j}" for j in range(values.shape[0])), values)


def test_pam_oracle_equivalence():
    start = time.perf_counter()
    mismatches = 0
    for trial in range(60):
        points, k, metric = pam_oracle_instance(trial)
        d = dissimilarity_matrix(points, metric=metric)
        solution = pam(d, k)
        optimum = min(
            d.values[:, combo].min(axis=1).sum()
            for combo in itertools.combinations(range(d.n), k)
        )
        if abs(solution.cost_z - optimum) > 1e-12:
            mismatches += 1
    elapsed = time.perf_counter() - start
    report(
        "pam-oracle-equivalence",
        mismatches == 0 and elapsed < 5.0,
        f"60 instances, {mismatches} mismatches, {elapsed:.2f}s",
    )


def test_silhouette_hand_oracle():
    d = dissimilarity_matrix(np.array([0.0, 1.0, 10.0, 11.0])[:, None])
    _, mean = silhouette(d, np.array([0, 0, 1, 1]))
    expected = (19.0 / 21.0 + 17.0 / 19.0) / 2.0
    ok = abs(mean - expected) < 1e-9

    line = dissimilarity_matrix(np.array([0.0, 2.0, 1.0, 3.0])[:, None])
    s_tie, _ = silhouette(line, np.array([0, 0, 1, 1]))
    ok &= s_tie[0] == 0.0  # a(i) = b(i) = 2 exactly

    three = dissimilarity_matrix(np.array([0.0, 1.0, 10.0])[:, None])
    s_single, _ = silhouette(three, np.array([0, 0, 1]))
    ok &= s_single[2] == 0.0  # singleton cluster
    report("silhouette-hand-oracle", ok, f"mean={mean!r} vs {expected!r}")


def test_paf_analytic_fixed_point():
    r = plain_r([[1.0, 0.6], [0.6, 1.0]])
    solution = extract_paf(r, 1, tol=1e-10)
    load_err = float(np.max(np.abs(solution.loadings.ravel() - math.sqrt(0.6))))
    fit = fit_indices(r, solution, 100)
    ok = load_err < 1e-6 and fit.rmsr < 1e-8
    report("paf-analytic-fixed-point", ok, f"|loading err|={load_err:.2e}, rmsr={fit.rmsr:.2e}")


def test_bartlett_closed_form():
    identity = bartlett_test(plain_r(np.eye(5)), 50)
    closed = bartlett_test(plain_r([[1.0, 0.6], [0.6, 1.0]]), 100)
    ok = (
        identity.statistic == 0.0
        and abs(identity.p_value - 1.0) < 1e-12
        and abs(closed.statistic - 43.513) < 1e-3
        and closed.df == 1
    )
    report(
        "bartlett-closed-form",
        ok,
        f"identity stat={identity.statistic}, p2 stat={closed.statistic:.4f}",
    )


def test_kmo_closed_forms():
    errs = []
    for r in (0.2, -0.5, 0.9):
        errs.append(abs(kmo(plain_r([[1.0, r], [r, 1.0]])).overall - 0.5))
    equi = kmo(plain_r(np.full((3, 3), 0.5) + 0.5 * np.eye(3))).overall
    ok = max(errs) < 1e-10 and abs(equi - 0.6923) < 1e-4
    report("kmo-closed-forms", ok, f"p2 err={max(errs):.2e}, equicorr={equi:.6f}")


def test_varimax_invariants():
    rng = np.random.default_rng(77)
    worst_ortho = worst_comm = worst_drop = 0.0
    for _ in range(100):
        p = int(rng.integers(4, 16))
        m = int(rng.integers(2, 5))
        lam = rng.uniform(-1.0, 1.0, (p, m))
        lam /= np.maximum(1.0, np.sqrt((lam * lam).sum(axis=1)))[:, None]
        history = []
        rotated, rotation = varimax(lam, criterion_history=history)
        worst_ortho = max(
            worst_ortho, float(np.max(np.abs(rotation.T @ rotation - np.eye(m))))
        )
        worst_comm = max(
            worst_comm,
            float(np.max(np.abs((rotated**2).sum(axis=1) - (lam**2).sum(axis=1)))),
        )
        worst_drop = max(worst_drop, float(-min(np.diff(history), default=0.0)))
    ok = worst_ortho < 1e-10 and worst_comm < 1e-8 and worst_drop <= 1e-12
    report(
        "varimax-invariants",
        ok,
        f"ortho={worst_ortho:.2e}, comm={worst_comm:.2e}, criterion drop={worst_drop:.2e}",
    )


def test_parallel_analysis_criteria():
    noise = noise_matrix(200, 10, seed=7)
    pa_noise = parallel_analysis(noise, replicates=100, quantile=0.95, seed=42)
    pa_again = parallel_analysis(noise, replicates=100, quantile=0.95, seed=42)
    planted = parallel_analysis(
        planted_two_factor_matrix(), replicates=100, quantile=0.95, seed=42
    )
    deterministic = (
        np.array_equal(pa_noise.reference_eigenvalues, pa_again.reference_eigenvalues)
        and pa_noise.suggested_factors == pa_again.suggested_factors
    )
    ok = pa_noise.suggested_factors <= 1 and planted.suggested_factors == 2 and deterministic
    report(
        "parallel-analysis",
        ok,
        f"noise={pa_noise.suggested_factors}, planted={planted.suggested_factors}, "
        f"deterministic={deterministic}",
    )


def test_end_to_end_synthetic_pipeline(tmp_path):
    fixture = composite_fixture()
    config_path = write_composite(fixture, tmp_path)
    config = load_config(config_path)
    start = time.perf_counter()
    manifest = run_pipeline(config, tmp_path / "out")
    elapsed = time.perf_counter() - start

    factors_doc = json.loads((tmp_path / "out" / "factors.json").read_text())
    _, kscan = read_table(tmp_path / "out" / "kscan.csv")
    best_k = max(kscan, key=lambda row: float(row[1]))[0]
    _, vuln = read_table(tmp_path / "out" / "vulnerability.csv")
    flagged = sorted(row[0] for row in vuln if row[4] == "true")
    trend_text = (tmp_path / "out" / "trends.txt").read_text()
    ratio = None
    for line in trend_text.splitlines():
        if line.startswith("ratio_vulnerable_to_nonvulnerable = "):
            ratio = float(line.split(" = ")[1])
    ok = (
        manifest.status == "ok"
        and factors_doc["suggested_factors"] == 2
        and factors_doc["n_factors"] == 2
        and best_k == "3"
        and flagged == fixture.vulnerable_codes
        and ratio is not None
        and abs(ratio - 0.5) < 1e-9
        and elapsed < 30.0
    )
    report(
        "end-to-end-synthetic-pipeline",
        ok,
        f"factors={factors_doc['suggested_factors']}, k={best_k}, "
        f"|vulnerable|={len(flagged)}, ratio={ratio!r}, {elapsed:.1f}s",
    )


def test_quantile_rule_exactness():
    ok = True
    detail = []
    for n in (5, 10, 37, 966):
        rng = np.random.default_rng(n)
        scores = rng.standard_normal((n, 1))
        ids = [f"11-{1000 + i % 9000:04d}.{i // 9000:02d}" for i in range(n)]
        flags, _ = score_criteria(
            scores, [SusceptibilityCriterion(0, "top", 0.20, "t")], ids
        )
        count = sum(1 for f in flags.values() if f)
        ok &= count == math.ceil(0.2 * n)
        detail.append(f"n={n}:{count}")
    rng = np.random.default_rng(88)
    for _ in range(20):
        scores = rng.standard_normal((30, 2))
        scale = float(rng.uniform(0.01, 100.0))
        criteria = [
            SusceptibilityCriterion(0, "top", 0.2, "t"),
            SusceptibilityCriterion(1, "bottom", 0.2, "b"),
        ]
        ids = [f"11-{1000 + i:04d}.00" for i in range(30)]
        base = score_criteria(scores, criteria, ids)
        scaled = score_criteria(scores * scale, criteria, ids)
        ok &= base == scaled
    report("quantile-rule-exactness", ok, ", ".join(detail) + ", 20 scale checks")


def test_full_run_determinism(tmp_path):
    fixture = composite_fixture()
    config_path = write_composite(fixture, tmp_path)
    config = load_config(config_path)
    manifest_a = run_pipeline(config, tmp_path / "out_a")
    manifest_b = run_pipeline(config, tmp_path / "out_b")
    same_digests = manifest_a.outputs == manifest_b.outputs
    byte_identical = all(
        (tmp_path / "out_a" / name).read_bytes() == (tmp_path / "out_b" / name).read_bytes()
        for name in manifest_a.outputs
    )
    ok = same_digests and byte_identical and manifest_a.inputs == manifest_b.inputs
    report(
        "full-run-determinism",
        ok,
        f"{len(manifest_a.outputs)} artifacts, digests equal={same_digests}",
    )
