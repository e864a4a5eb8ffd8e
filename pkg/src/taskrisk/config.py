"""Pipeline configuration: a single JSON document with a versioned schema.

Unknown keys are errors, not warnings, so misspelled options cannot be
silently ignored. A seed is mandatory for the parallel-analysis stage (the
only always-stochastic step) and for random-start clustering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, MissingInputError
from .vulnerability import SusceptibilityCriterion

SCHEMA_VERSION = 1


@dataclass
class InputsConfig:
    attributes: list[str]
    employment: str
    catalog: str | None = None
    attributes_delimiter: str | None = None
    employment_delimiter: str | None = None
    catalog_delimiter: str | None = None


@dataclass
class ParallelAnalysisConfig:
    seed: int
    replicates: int = 100
    quantile: float = 0.95


@dataclass
class FactorsConfig:
    m: int | str = "auto"
    rotate: bool = True
    kaiser_normalize: bool = False
    tol: float = 1e-6
    max_iter: int = 200
    labels: list[str] | None = None
    score_method: str = "regression"


@dataclass
class ClusteringConfig:
    metric: str = "euclidean"
    k: int | None = None
    k_min: int = 2
    k_max: int = 12
    seed: int = 0
    init: str = "build"


@dataclass
class LabelingConfig:
    susceptible_factors: list[int] = field(default_factory=list)
    bottleneck_factors: list[int] = field(default_factory=list)
    threshold_sd: float = 0.5


@dataclass
class TrendsConfig:
    year_start: int
    year_end: int
    subgroups: dict[str, list[str]] = field(default_factory=dict)


@dataclass
class PipelineConfig:
    inputs: InputsConfig
    parallel_analysis: ParallelAnalysisConfig
    trends: TrendsConfig
    standardize: bool = True
    factors: FactorsConfig = field(default_factory=FactorsConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    criteria: list[SusceptibilityCriterion] = field(default_factory=list)
    cluster_labeling: LabelingConfig = field(default_factory=LabelingConfig)
    output_dir: str = "out"

    def snapshot(self) -> dict:
        """JSON-serializable copy recorded in the run manifest."""
        return {
            "schema_version": SCHEMA_VERSION,
            "inputs": vars(self.inputs).copy(),
            "standardize": self.standardize,
            "parallel_analysis": vars(self.parallel_analysis).copy(),
            "factors": vars(self.factors).copy(),
            "clustering": vars(self.clustering).copy(),
            "criteria": [vars(c).copy() for c in self.criteria],
            "cluster_labeling": vars(self.cluster_labeling).copy(),
            "trends": {
                "year_start": self.trends.year_start,
                "year_end": self.trends.year_end,
                "subgroups": {k: list(v) for k, v in self.trends.subgroups.items()},
            },
        }


def _require(obj: dict, where: str, required: set[str], optional: set[str]) -> None:
    unknown = set(obj) - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")


def _number(obj, where, key, lo=None, hi=None, integer=False):
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{where}.{key}: {value} below minimum {lo}")
    if hi is not None and value > hi:
        raise ConfigError(f"{where}.{key}: {value} above maximum {hi}")
    return int(value) if integer else float(value)


def _string(obj, where, key, choices=None):
    value = obj[key]
    if not isinstance(value, str):
        raise ConfigError(f"{where}.{key}: expected a string, got {value!r}")
    if choices and value not in choices:
        raise ConfigError(f"{where}.{key}: {value!r} not in {sorted(choices)}")
    return value


def _bool(obj, where, key):
    value = obj[key]
    if not isinstance(value, bool):
        raise ConfigError(f"{where}.{key}: expected true/false, got {value!r}")
    return value


def parse_config(doc: dict) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be an object")
    _require(
        doc,
        "config",
        {"schema_version", "inputs", "parallel_analysis", "trends"},
        {
            "standardize",
            "factors",
            "clustering",
            "criteria",
            "cluster_labeling",
            "output_dir",
        },
    )
    version = doc["schema_version"]
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"config.schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )

    raw = doc["inputs"]
    _require(
        raw,
        "inputs",
        {"attributes", "employment"},
        {"catalog", "attributes_delimiter", "employment_delimiter", "catalog_delimiter"},
    )
    attributes = raw["attributes"]
    if isinstance(attributes, str):
        attributes = [attributes]
    if not isinstance(attributes, list) or not all(isinstance(a, str) for a in attributes):
        raise ConfigError("inputs.attributes: expected a path or list of paths")
    delims = {}
    for key in ("attributes_delimiter", "employment_delimiter", "catalog_delimiter"):
        if key in raw:
            delims[key] = _string(raw, "inputs", key, choices={",", "\t", "tab", "comma"})
            delims[key] = {"tab": "\t", "comma": ","}.get(delims[key], delims[key])
    inputs = InputsConfig(
        attributes=attributes,
        employment=_string(raw, "inputs", "employment"),
        catalog=_string(raw, "inputs", "catalog") if "catalog" in raw else None,
        **delims,
    )

    raw = doc["parallel_analysis"]
    _require(raw, "parallel_analysis", {"seed"}, {"replicates", "quantile"})
    pa = ParallelAnalysisConfig(
        seed=_number(raw, "parallel_analysis", "seed", lo=0, integer=True),
        replicates=_number(raw, "parallel_analysis", "replicates", lo=1, integer=True)
        if "replicates" in raw
        else 100,
        quantile=_number(raw, "parallel_analysis", "quantile", lo=0, hi=1)
        if "quantile" in raw
        else 0.95,
    )
    if not 0.0 < pa.quantile < 1.0:
        raise ConfigError("parallel_analysis.quantile: must be strictly inside (0, 1)")

    factors = FactorsConfig()
    if "factors" in doc:
        raw = doc["factors"]
        _require(
            raw,
            "factors",
            set(),
            {"m", "rotate", "kaiser_normalize", "tol", "max_iter", "labels", "score_method"},
        )
        if "m" in raw:
            if raw["m"] == "auto":
                factors.m = "auto"
            else:
                factors.m = _number(raw, "factors", "m", lo=1, integer=True)
        if "rotate" in raw:
            factors.rotate = _bool(raw, "factors", "rotate")
        if "kaiser_normalize" in raw:
            factors.kaiser_normalize = _bool(raw, "factors", "kaiser_normalize")
        if "tol" in raw:
            factors.tol = _number(raw, "factors", "tol", lo=0)
            if factors.tol == 0:
                raise ConfigError("factors.tol: must be > 0")
        if "max_iter" in raw:
            factors.max_iter = _number(raw, "factors", "max_iter", lo=1, integer=True)
        if "labels" in raw:
            labels = raw["labels"]
            if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
                raise ConfigError("factors.labels: expected a list of strings")
            factors.labels = labels
        if "score_method" in raw:
            factors.score_method = _string(
                raw, "factors", "score_method", choices={"regression"}
            )

    clustering = ClusteringConfig()
    if "clustering" in doc:
        raw = doc["clustering"]
        _require(raw, "clustering", set(), {"metric", "k", "k_min", "k_max", "seed", "init"})
        if "metric" in raw:
            clustering.metric = _string(
                raw, "clustering", "metric", choices={"euclidean", "manhattan"}
            )
        if "k" in raw and raw["k"] is not None:
            clustering.k = _number(raw, "clustering", "k", lo=1, integer=True)
        if "k_min" in raw:
            clustering.k_min = _number(raw, "clustering", "k_min", lo=2, integer=True)
        if "k_max" in raw:
            clustering.k_max = _number(raw, "clustering", "k_max", lo=2, integer=True)
        if clustering.k_min > clustering.k_max:
            raise ConfigError("clustering: k_min exceeds k_max")
        if "seed" in raw:
            clustering.seed = _number(raw, "clustering", "seed", lo=0, integer=True)
        if "init" in raw:
            clustering.init = _string(raw, "clustering", "init", choices={"build", "random"})
        if clustering.init == "random" and "seed" not in raw:
            raise ConfigError("clustering.seed: required when init is 'random'")

    criteria = []
    for idx, raw in enumerate(doc.get("criteria", [])):
        where = f"criteria[{idx}]"
        _require(raw, where, {"factor", "direction", "label"}, {"fraction"})
        criteria.append(
            SusceptibilityCriterion(
                factor_index=_number(raw, where, "factor", lo=0, integer=True),
                direction=_string(raw, where, "direction", choices={"top", "bottom"}),
                fraction=_number(raw, where, "fraction", lo=0, hi=1)
                if "fraction" in raw
                else 0.20,
                label=_string(raw, where, "label"),
            )
        )

    labeling = LabelingConfig()
    if "cluster_labeling" in doc:
        raw = doc["cluster_labeling"]
        _require(
            raw,
            "cluster_labeling",
            set(),
            {"susceptible_factors", "bottleneck_factors", "threshold_sd"},
        )
        for key in ("susceptible_factors", "bottleneck_factors"):
            if key in raw:
                value = raw[key]
                if not isinstance(value, list) or not all(
                    isinstance(i, int) and not isinstance(i, bool) and i >= 0
                    for i in value
                ):
                    raise ConfigError(
                        f"cluster_labeling.{key}: expected a list of factor indices"
                    )
                setattr(labeling, key, value)
        if "threshold_sd" in raw:
            labeling.threshold_sd = _number(raw, "cluster_labeling", "threshold_sd", lo=0)

    raw = doc["trends"]
    _require(raw, "trends", {"year_start", "year_end"}, {"subgroups"})
    subgroups = {}
    if "subgroups" in raw:
        if not isinstance(raw["subgroups"], dict):
            raise ConfigError("trends.subgroups: expected an object of code lists")
        for name, codes in raw["subgroups"].items():
            if not isinstance(codes, list) or not all(isinstance(c, str) for c in codes):
                raise ConfigError(f"trends.subgroups.{name}: expected a list of soc codes")
            subgroups[name] = codes
    trends = TrendsConfig(
        year_start=_number(raw, "trends", "year_start", integer=True),
        year_end=_number(raw, "trends", "year_end", integer=True),
        subgroups=subgroups,
    )
    if trends.year_start >= trends.year_end:
        raise ConfigError("trends: year_start must be before year_end")

    standardize = _bool(doc, "config", "standardize") if "standardize" in doc else True
    output_dir = (
        _string(doc, "config", "output_dir") if "output_dir" in doc else "out"
    )
    return PipelineConfig(
        inputs=inputs,
        parallel_analysis=pa,
        trends=trends,
        standardize=standardize,
        factors=factors,
        clustering=clustering,
        criteria=criteria,
        cluster_labeling=labeling,
        output_dir=output_dir,
    )


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    config = parse_config(doc)
    base = path.parent
    config.inputs.attributes = [str((base / p)) for p in config.inputs.attributes]
    config.inputs.employment = str(base / config.inputs.employment)
    if config.inputs.catalog is not None:
        config.inputs.catalog = str(base / config.inputs.catalog)
    return config
