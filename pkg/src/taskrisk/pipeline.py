"""Pipeline orchestration, stage IO, and the run manifest.

Stages run in a fixed order with fail-fast semantics; every stage can also
run standalone from the previous stage's emitted tables, which is what the
CLI subcommands do. All tables are written with full-precision floats so a
staged rerun reproduces the full run byte for byte.
"""

from __future__ import annotations

import hashlib
import io
import json
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, adequacy, clustering, corpus, factors, tables, trends, vulnerability
from .config import PipelineConfig
from .errors import MissingInputError, ParameterError
from .kernels import BACKEND
from .plots import emit_plot


@dataclass
class RunManifest:
    config: dict
    inputs: dict[str, dict] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    stages: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    status: str = "ok"
    error: str | None = None

    def to_json(self) -> str:
        doc = {
            "artifact": {"name": "taskrisk", "version": __version__, "kernel_backend": BACKEND},
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "stages": self.stages,
            "warnings": self.warnings,
            "status": self.status,
            "error": self.error,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _require_file(path: str, role: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise MissingInputError(f"{role} file not found: {p}")
    return p


def default_catalog_text() -> str:
    return (resources.files("taskrisk") / "data" / "default_catalog.csv").read_text(
        encoding="utf-8"
    )


def load_catalog(config: PipelineConfig) -> corpus.AttributeCatalog:
    if config.inputs.catalog is None:
        return corpus.parse_catalog_file(io.StringIO(default_catalog_text()))
    path = _require_file(config.inputs.catalog, "catalog")
    with path.open(encoding="utf-8") as fh:
        return corpus.parse_catalog_file(fh, config.inputs.catalog_delimiter)


def load_observations(config: PipelineConfig) -> list[corpus.AttributeObservation]:
    observations: list[corpus.AttributeObservation] = []
    for path in config.inputs.attributes:
        p = _require_file(path, "attributes")
        with p.open(encoding="utf-8") as fh:
            observations.extend(
                corpus.parse_attribute_file(fh, config.inputs.attributes_delimiter)
            )
    return observations


def load_employment(config: PipelineConfig) -> corpus.EmploymentSeries:
    path = _require_file(config.inputs.employment, "employment")
    with path.open(encoding="utf-8") as fh:
        return corpus.parse_employment_file(fh, config.inputs.employment_delimiter)


# ---------------------------------------------------------------- table IO

def write_matrix(out: Path, matrix: corpus.OccupationMatrix) -> None:
    rows = [
        [soc] + [float(v) for v in matrix.values[i]]
        for i, soc in enumerate(matrix.occupation_ids)
    ]
    tables.write_table(out / "matrix.csv", ["soc_code"] + matrix.attribute_ids, rows)


def read_matrix(out: Path, standardized: bool) -> corpus.OccupationMatrix:
    header, rows = tables.read_table(_require_file(out / "matrix.csv", "matrix"))
    attr_ids = header[1:]
    socs = [r[0] for r in rows]
    values = np.array([[float(c) for c in r[1:]] for r in rows])
    return corpus.OccupationMatrix(socs, attr_ids, values, standardized=standardized)


def read_scores(out: Path) -> tuple[list[str], list[str], np.ndarray]:
    header, rows = tables.read_table(_require_file(out / "scores.csv", "scores"))
    socs = [r[0] for r in rows]
    values = np.array([[float(c) for c in r[1:]] for r in rows])
    return socs, header[1:], values


def read_cluster_solution(out: Path, socs: list[str]) -> clustering.ClusterSolution:
    """Rebuild the solution a standalone `classify` needs from clusters.csv
    and medoids.csv (assignment, medoid row indices)."""
    _, rows = tables.read_table(_require_file(out / "clusters.csv", "clusters"))
    assign_of = {r[0]: int(r[1]) for r in rows}
    missing = [s for s in socs if s not in assign_of]
    if missing:
        raise ParameterError(f"clusters.csv is missing occupations: {missing[:5]}")
    assignment = np.array([assign_of[s] for s in socs], dtype=np.int64)
    _, medoid_rows = tables.read_table(_require_file(out / "medoids.csv", "medoids"))
    row_of = {s: i for i, s in enumerate(socs)}
    medoids = [0] * len(medoid_rows)
    for cluster_id, medoid_soc in medoid_rows:
        medoids[int(cluster_id)] = row_of[medoid_soc]
    cost = 0.0
    return clustering.ClusterSolution(
        k=len(medoids),
        medoids=medoids,
        assignment=assignment,
        cost_z=cost,
        cost_history=[cost],
    )


def read_vulnerability(out: Path) -> vulnerability.VulnerabilityReport:
    """Rebuild the minimal report `trends` needs from vulnerability.csv."""
    _, rows = tables.read_table(_require_file(out / "vulnerability.csv", "vulnerability"))
    cluster_of = {r[0]: int(r[1]) for r in rows}
    vulnerable = sorted(r[0] for r in rows if r[4] == "true")
    vulnerable_clusters = {cluster_of[s] for s in vulnerable}
    return vulnerability.VulnerabilityReport(
        criteria=[],
        flags={r[0]: set() for r in rows},
        susceptibility_type={r[0]: r[2] for r in rows},
        vulnerable_clusters=vulnerable_clusters,
        vulnerable_occupations=vulnerable,
        cluster_of=cluster_of,
        threshold_sd=0.0,
    )


# ------------------------------------------------------------------ stages

def stage_ingest(config: PipelineConfig, out: Path):
    catalog = load_catalog(config)
    observations = load_observations(config)
    matrix, dropped = corpus.build_matrix(observations, catalog)
    if config.standardize:
        matrix = corpus.standardize(matrix)
    write_matrix(out, matrix)
    tables.write_table(
        out / "drop_report.csv",
        ["soc_code", "missing_attribute_ids"],
        [[d.soc_code, ";".join(d.missing_attribute_ids)] for d in dropped],
    )
    return matrix, catalog, dropped


def stage_adequacy(config: PipelineConfig, out: Path, matrix=None):
    if matrix is None:
        matrix = read_matrix(out, config.standardize)
    result = adequacy.assess(matrix)
    lines = [
        f"n_occupations = {matrix.shape[0]}",
        f"n_attributes = {matrix.shape[1]}",
        f"bartlett_statistic = {result.bartlett_statistic!r}",
        f"bartlett_df = {result.bartlett_df}",
        f"bartlett_p_value = {result.bartlett_p!r}",
        f"kmo_overall = {result.kmo_overall!r}",
    ]
    for attr in sorted(result.kmo_per_variable):
        lines.append(f"kmo[{attr}] = {result.kmo_per_variable[attr]!r}")
    lines.append(
        "guidance = advisory only: factorability is conventionally adequate when "
        f"KMO >= {adequacy.KMO_GUIDANCE} and Bartlett p < {adequacy.BARTLETT_P_GUIDANCE}; "
        "nothing is gated on these thresholds"
    )
    (out / "adequacy.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return result


def stage_factors(config: PipelineConfig, out: Path, matrix=None):
    if matrix is None:
        matrix = read_matrix(out, config.standardize)
    pa_cfg = config.parallel_analysis
    pa = factors.parallel_analysis(
        matrix, replicates=pa_cfg.replicates, quantile=pa_cfg.quantile, seed=pa_cfg.seed
    )
    tables.write_table(
        out / "scree.csv",
        ["rank", "observed", "reference"],
        [
            [r + 1, float(pa.observed_eigenvalues[r]), float(pa.reference_eigenvalues[r])]
            for r in range(len(pa.observed_eigenvalues))
        ],
    )

    f_cfg = config.factors
    m = max(pa.suggested_factors, 1) if f_cfg.m == "auto" else int(f_cfg.m)
    r = adequacy.correlation(matrix)
    solution = factors.extract_paf(r, m, tol=f_cfg.tol, max_iter=f_cfg.max_iter)
    if f_cfg.rotate and m > 1:
        factors.rotate_solution(solution, kaiser_normalize=f_cfg.kaiser_normalize)
    solution.fit = factors.fit_indices(r, solution, matrix.shape[0])
    solution.factor_labels = factors.pad_factor_labels(f_cfg.labels, m)
    factors.factor_scores(matrix, r, solution)

    labels = solution.factor_labels
    tables.write_table(
        out / "loadings.csv",
        ["attribute_id"] + labels + ["communality"],
        [
            [attr]
            + [float(v) for v in solution.loadings[i]]
            + [float(solution.communalities[i])]
            for i, attr in enumerate(matrix.attribute_ids)
        ],
    )
    tables.write_table(
        out / "scores.csv",
        ["soc_code"] + labels,
        [
            [soc] + [float(v) for v in solution.scores[i]]
            for i, soc in enumerate(matrix.occupation_ids)
        ],
    )
    fit = solution.fit
    (out / "factors.json").write_text(
        json.dumps(
            {
                "n_factors": m,
                "suggested_factors": pa.suggested_factors,
                "factor_labels": labels,
                "eigenvalues": [float(v) for v in solution.eigenvalues],
                "n_iterations": solution.n_iterations,
                "heywood_variables": list(solution.heywood_variables),
                "fit": {
                    "tli": fit.tli,
                    "rmsr": fit.rmsr,
                    "rmsea": fit.rmsea,
                    "bic": fit.bic,
                    "chi_square": fit.chi_square,
                    "df": fit.df,
                },
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return pa, solution


def stage_cluster(config: PipelineConfig, out: Path, socs=None, scores=None):
    if scores is None:
        socs, _, scores = read_scores(out)
    c_cfg = config.clustering
    d = clustering.dissimilarity_matrix(scores, metric=c_cfg.metric, ids=socs)
    if c_cfg.k is not None:
        best_k = int(c_cfg.k)
        solution = clustering.with_silhouettes(
            d, clustering.pam(d, best_k, seed=c_cfg.seed, init=c_cfg.init)
        )
        scan_rows = [(best_k, solution.mean_silhouette, solution.cost_z)]
    else:
        k_max = min(c_cfg.k_max, d.n - 1)
        best_k, scan_rows = clustering.select_k(d, c_cfg.k_min, k_max, seed=c_cfg.seed)
        solution = clustering.with_silhouettes(
            d, clustering.pam(d, best_k, seed=c_cfg.seed, init=c_cfg.init)
        )
    tables.write_table(
        out / "kscan.csv",
        ["k", "mean_silhouette", "cost_z"],
        [[k, float(s), float(c)] for k, s, c in scan_rows],
    )
    dm = d.values[np.arange(d.n), [solution.medoids[c] for c in solution.assignment]]
    tables.write_table(
        out / "clusters.csv",
        ["soc_code", "cluster", "distance_to_medoid", "silhouette"],
        [
            [soc, int(solution.assignment[i]), float(dm[i]), float(solution.silhouettes[i])]
            for i, soc in enumerate(socs)
        ],
    )
    tables.write_table(
        out / "medoids.csv",
        ["cluster", "medoid_soc_code"],
        [[c, socs[m]] for c, m in enumerate(solution.medoids)],
    )
    return d, solution, best_k


def stage_classify(config: PipelineConfig, out: Path, socs=None, scores=None, solution=None):
    if scores is None:
        socs, _, scores = read_scores(out)
    if solution is None:
        solution = read_cluster_solution(out, socs)
    if not config.criteria:
        raise ParameterError("config.criteria is empty; nothing to classify")
    flags, types = vulnerability.score_criteria(scores, config.criteria, socs)
    lab = config.cluster_labeling
    vulnerable_clusters = vulnerability.label_clusters(
        solution,
        scores,
        set(lab.susceptible_factors),
        set(lab.bottleneck_factors),
        threshold_sd=lab.threshold_sd,
    )
    report = vulnerability.vulnerable_list(
        config.criteria, flags, types, solution, vulnerable_clusters, socs, lab.threshold_sd
    )

    vulnerable_set = set(report.vulnerable_occupations)
    crit_desc = "; ".join(
        f"{c.label}: {c.direction} {c.fraction:g} of factor {c.factor_index}"
        for c in config.criteria
    )
    top = [
        f"threshold_sd = {lab.threshold_sd!r}",
        f"susceptible_factors = {sorted(lab.susceptible_factors)}",
        f"bottleneck_factors = {sorted(lab.bottleneck_factors)}",
        f"criteria = {crit_desc}",
    ]
    summary = [
        f"vulnerable_clusters = {sorted(report.vulnerable_clusters)}",
        f"vulnerable_occupations = {len(report.vulnerable_occupations)}",
    ]
    for cluster in sorted(report.counts_per_cluster):
        summary.append(f"count[cluster={cluster}] = {report.counts_per_cluster[cluster]}")
    for type_name in sorted(report.counts_per_type):
        summary.append(f"count[type={type_name}] = {report.counts_per_type[type_name]}")
    tables.write_table(
        out / "vulnerability.csv",
        ["soc_code", "cluster", "susceptibility_type", "criteria_satisfied", "vulnerable"],
        [
            [
                soc,
                report.cluster_of[soc],
                types[soc],
                ";".join(c.label for c in config.criteria if c.label in flags[soc]),
                soc in vulnerable_set,
            ]
            for soc in socs
        ],
        comments_top=top,
        comments_bottom=summary,
    )
    return report


def stage_trends(config: PipelineConfig, out: Path, report=None):
    if report is None:
        report = read_vulnerability(out)
    series = load_employment(config)
    window = (config.trends.year_start, config.trends.year_end)
    subgroups = {k: set(v) for k, v in config.trends.subgroups.items()}
    trend = trends.compare_groups(series, report, window, subgroups or None)

    rows = []
    for name in sorted(trend.group_stats):
        g = trend.group_stats[name]
        rows.append(
            [
                name,
                g.mean_annual_growth,
                g.mean_cagr,
                g.pooled_annual_growth,
                g.whole_period_growth,
                g.total_start,
                g.total_end,
                g.count,
            ]
        )
    tables.write_table(
        out / "trends.csv",
        [
            "group",
            "mean_annual_growth",
            "mean_cagr",
            "pooled_annual_growth",
            "whole_period_growth",
            "total_start",
            "total_end",
            "occupation_count",
        ],
        rows,
    )
    per_rows = []
    for name in ("vulnerable", "non_vulnerable"):
        g = trend.group_stats[name]
        for soc in sorted(g.per_occupation):
            per_rows.append([soc, name, g.per_occupation[soc]])
    tables.write_table(
        out / "trends_per_occupation.csv",
        ["soc_code", "group", "mean_annual_growth"],
        per_rows,
    )

    ratio = trend.ratio_vulnerable_to_nonvulnerable
    lines = [
        f"year_range = {trend.year_range[0]}..{trend.year_range[1]}",
        "ratio_vulnerable_to_nonvulnerable = "
        + (repr(ratio) if ratio is not None else "undefined (non-vulnerable growth <= 0)"),
    ]
    for name in sorted(trend.group_stats):
        g = trend.group_stats[name]
        lines.append(
            f"{name}: mean_annual_growth = {g.mean_annual_growth!r}, "
            f"mean_cagr = {g.mean_cagr!r}, whole_period_growth = {g.whole_period_growth!r}, "
            f"occupations = {g.count}"
        )
        for code, reason in g.excluded:
            lines.append(f"excluded[{name}] = {code}: {reason}")
    (out / "trends.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return trend


def stage_plots(config: PipelineConfig, out: Path):
    _, scree_rows = tables.read_table(_require_file(out / "scree.csv", "scree"))
    emit_plot(
        [[float(c) for c in row] for row in scree_rows], "scree", out / "scree.svg"
    )
    _, kscan_rows = tables.read_table(_require_file(out / "kscan.csv", "kscan"))
    emit_plot(
        [[float(c) for c in row] for row in kscan_rows],
        "silhouette_scan",
        out / "kscan.svg",
    )


# --------------------------------------------------------------- full run

def _input_digests(config: PipelineConfig) -> dict[str, dict]:
    digests: dict[str, dict] = {}
    for i, path in enumerate(config.inputs.attributes):
        digests[f"attributes[{i}]"] = {
            "path": str(path),
            "sha256": _sha256(_require_file(path, "attributes")),
        }
    digests["employment"] = {
        "path": str(config.inputs.employment),
        "sha256": _sha256(_require_file(config.inputs.employment, "employment")),
    }
    if config.inputs.catalog is not None:
        digests["catalog"] = {
            "path": str(config.inputs.catalog),
            "sha256": _sha256(_require_file(config.inputs.catalog, "catalog")),
        }
    else:
        digests["catalog"] = {
            "path": "builtin:default_catalog",
            "sha256": hashlib.sha256(default_catalog_text().encode()).hexdigest(),
        }
    return digests


def run_pipeline(config: PipelineConfig, out_dir=None) -> RunManifest:
    """Run every stage in order and write the output bundle plus manifest."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=config.snapshot())
    manifest.inputs = _input_digests(config)

    state: dict = {}

    def _run(name: str, fn) -> None:
        start = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fn()
        for w in caught:
            manifest.warnings.append(f"{name}: {w.category.__name__}: {w.message}")
        manifest.stages.append(
            {"name": name, "seconds": round(time.perf_counter() - start, 6)}
        )

    def _ingest():
        state["matrix"], state["catalog"], _ = stage_ingest(config, out)

    def _adequacy():
        stage_adequacy(config, out, state["matrix"])

    def _factors():
        state["pa"], state["solution"] = stage_factors(config, out, state["matrix"])

    def _cluster():
        _, state["clusters"], _ = stage_cluster(
            config, out, state["matrix"].occupation_ids, state["solution"].scores
        )

    def _classify():
        state["report"] = stage_classify(
            config,
            out,
            state["matrix"].occupation_ids,
            state["solution"].scores,
            state["clusters"],
        )

    def _trends():
        stage_trends(config, out, state["report"])

    def _plots():
        stage_plots(config, out)

    steps = [
        ("ingest", _ingest),
        ("adequacy", _adequacy),
        ("factors", _factors),
        ("cluster", _cluster),
        ("classify", _classify),
        ("trends", _trends),
        ("plots", _plots),
    ]
    try:
        for name, fn in steps:
            _run(name, fn)
    except Exception as exc:
        manifest.status = "failed"
        manifest.error = f"{type(exc).__name__}: {exc}"
        _finalize(manifest, out)
        raise
    _finalize(manifest, out)
    return manifest


def _finalize(manifest: RunManifest, out: Path) -> None:
    for path in sorted(out.iterdir()):
        if path.name == "manifest.json" or not path.is_file():
            continue
        manifest.outputs[path.name] = _sha256(path)
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
