"""End-to-end orchestration: load inputs, fit, score, explain, export.

run_pipeline turns a config into a scored case table plus a fixed set of
artifacts under the output directory:

- scores.csv: one row per case with sums, scores, and category
- fit_report.json: candidate fits, information criteria, chosen model,
  kernel bandwidth with the conventions behind it, normalization bounds
- density_samples.csv: fitted curves on an even grid over [0, 1]
- tree_full.dot / tree_pruned.dot: the explanation tree before and after
  cost-complexity pruning
- band_<lo>_<hi>.cxt, lattice_<lo>_<hi>.dot, supports_<lo>_<hi>.csv: one
  formal context, concept lattice, and support table per probability band

Reruns on identical inputs reproduce every artifact byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

from emprob import io as eio
from emprob.cases import WeightSumTable, enumerate_cases, weight_sum_table
from emprob.density import (
    ComponentSelection,
    FitReport,
    GaussianMixture,
    KernelDensityEstimate,
    SILVERMAN_CONVENTIONS,
    em_fit,
    select_component_count,
)
from emprob.fca import ConceptLattice, FormalContext, build_band_context, build_lattice
from emprob.schema import (
    Questionnaire,
    ValidationError,
    WeightMatrix,
    apply_merge,
    default_questionnaire,
    default_weight_matrix,
    load_questionnaire,
    load_weight_matrix,
    mean_weights,
    merge_questionnaire,
    parse_merge_rule,
    validate_weights,
)
from emprob.scoring import (
    ModelBundle,
    ScoreTable,
    elicit_probabilities,
    validate_thresholds,
)
from emprob.tree import TreeNode, fit_decision_tree, prune_tree

DEFAULT_BANDS = tuple((i / 10, (i + 1) / 10) for i in range(10))


@dataclass(frozen=True)
class PipelineConfig:
    """Pipeline settings; unset paths fall back to the shipped data."""

    questionnaire_path: str | None = None
    weights_path: str | None = None
    merge_rules: tuple[Mapping, ...] = ()
    n_components: int | None = 2
    m_max: int = 4
    em_tol: float = 1e-9
    em_max_iter: int = 10000
    thresholds: tuple[float, float] = (0.33, 0.68)
    bands: tuple[tuple[float, float], ...] = DEFAULT_BANDS
    band_approach: int = 1
    prune_alpha: float = 0.01
    tree_max_depth: int | None = None
    min_samples_leaf: int = 1
    density_samples: int = 1001
    output_dir: str = "out"

    def __post_init__(self) -> None:
        object.__setattr__(self, "thresholds", validate_thresholds(self.thresholds))
        bands = tuple((float(lo), float(hi)) for lo, hi in self.bands)
        for lo, hi in bands:
            if not (0.0 <= lo < hi <= 1.0):
                raise ValidationError(f"band must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")
        object.__setattr__(self, "bands", bands)
        object.__setattr__(self, "merge_rules", tuple(self.merge_rules))
        if self.n_components is not None and self.n_components < 1:
            raise ValidationError("n_components must be at least 1 (or null for automatic)")
        if self.m_max < 1:
            raise ValidationError("m_max must be at least 1")
        if self.band_approach not in (1, 2, 3):
            raise ValidationError("band_approach must be 1, 2, or 3")
        if self.prune_alpha < 0:
            raise ValidationError("prune_alpha must be nonnegative")
        if self.density_samples < 2:
            raise ValidationError("density_samples must be at least 2")
        if self.min_samples_leaf < 1:
            raise ValidationError("min_samples_leaf must be at least 1")

    @classmethod
    def from_mapping(cls, doc: Mapping) -> "PipelineConfig":
        """Build a config from a key/value document, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        for key in ("thresholds", "bands", "merge_rules"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(
                    tuple(v) if isinstance(v, (list, tuple)) else v for v in kwargs[key]
                )
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        import json

        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        if not isinstance(doc, Mapping):
            raise ValidationError(f"{path}: config must be a key/value document")
        return cls.from_mapping(doc)


@dataclass(frozen=True)
class PipelineResult:
    """Everything the pipeline computed, for in-process reuse."""

    config: PipelineConfig
    questionnaire: Questionnaire
    weight_matrix: WeightMatrix
    sum_table: WeightSumTable
    selection: ComponentSelection
    gmm: GaussianMixture
    gmm_report: FitReport
    kde: KernelDensityEstimate
    table: ScoreTable
    bundle: ModelBundle
    tree_full: TreeNode
    tree_pruned: TreeNode
    band_contexts: tuple[tuple[tuple[float, float], FormalContext], ...]
    lattices: tuple[tuple[tuple[float, float], ConceptLattice], ...]


def load_inputs(cfg: PipelineConfig) -> tuple[Questionnaire, WeightMatrix]:
    """Load the questionnaire and weight matrix and apply all merge rules
    (those embedded in the questionnaire document first, then the config's),
    returning a consistent merged pair."""
    questionnaire = (
        default_questionnaire()
        if cfg.questionnaire_path is None
        else load_questionnaire(cfg.questionnaire_path)
    )
    weight_matrix = (
        default_weight_matrix()
        if cfg.weights_path is None
        else load_weight_matrix(cfg.weights_path)
    )
    for rule in questionnaire.merge_rules:
        weight_matrix = apply_merge(weight_matrix, rule, questionnaire)
        questionnaire = merge_questionnaire(questionnaire, rule)
    for raw in cfg.merge_rules:
        rule = parse_merge_rule(raw, questionnaire)
        weight_matrix = apply_merge(weight_matrix, rule, questionnaire)
        questionnaire = merge_questionnaire(questionnaire, rule)
    validate_weights(weight_matrix, questionnaire)
    return questionnaire, weight_matrix


def prepare(cfg: PipelineConfig) -> PipelineResult:
    """Run every pipeline stage in memory, writing nothing."""
    questionnaire, weight_matrix = load_inputs(cfg)
    mw = mean_weights(weight_matrix)
    case_set = enumerate_cases(questionnaire)
    sum_table = weight_sum_table(case_set, mw)
    x = sum_table.normalized

    selection = select_component_count(
        x, m_max=cfg.m_max, tol=cfg.em_tol, max_iter=cfg.em_max_iter
    )
    m = selection.best_m if cfg.n_components is None else cfg.n_components
    gmm, gmm_report = em_fit(x, m, tol=cfg.em_tol, max_iter=cfg.em_max_iter)
    kde = KernelDensityEstimate.from_data(x)

    table = elicit_probabilities(sum_table, gmm, kde, thresholds=cfg.thresholds)
    bundle = ModelBundle(
        questionnaire=questionnaire,
        mean_weight_vector=mw,
        raw_min=sum_table.raw_min,
        raw_max=sum_table.raw_max,
        gmm=gmm,
        kde=kde,
    )
    tree_full = fit_decision_tree(
        case_set,
        table.category,
        max_depth=cfg.tree_max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
    )
    tree_pruned = prune_tree(tree_full, cfg.prune_alpha)

    band_contexts = []
    lattices = []
    for band in cfg.bands:
        ctx = build_band_context(table, band, cfg.band_approach)
        band_contexts.append((band, ctx))
        lattices.append((band, build_lattice(ctx)))

    return PipelineResult(
        config=cfg,
        questionnaire=questionnaire,
        weight_matrix=weight_matrix,
        sum_table=sum_table,
        selection=selection,
        gmm=gmm,
        gmm_report=gmm_report,
        kde=kde,
        table=table,
        bundle=bundle,
        tree_full=tree_full,
        tree_pruned=tree_pruned,
        band_contexts=tuple(band_contexts),
        lattices=tuple(lattices),
    )


def _report_entry(rep: FitReport) -> dict:
    return {
        "n_components": rep.n_components,
        "log_likelihood": rep.log_likelihood,
        "aic": rep.aic,
        "bic": rep.bic,
        "iterations": rep.iterations,
        "converged": rep.converged,
    }


def fit_report_document(result: PipelineResult) -> dict:
    """The fit report as a plain JSON-serializable mapping."""
    sel = result.selection
    return {
        "n_observations": len(result.sum_table),
        "normalization": {
            "raw_min": result.sum_table.raw_min,
            "raw_max": result.sum_table.raw_max,
        },
        "thresholds": list(result.config.thresholds),
        "selection": {
            "aic_best_m": sel.aic_best_m,
            "bic_best_m": sel.bic_best_m,
            "criteria_agree": sel.criteria_agree,
            "candidates": [_report_entry(r) for r in sel.reports],
        },
        "selected_components": result.gmm.n_components,
        "gmm": {
            "weights": [float(v) for v in result.gmm.weights],
            "means": [float(v) for v in result.gmm.means],
            "sigmas": [float(v) for v in result.gmm.sigmas],
            **_report_entry(result.gmm_report),
        },
        "kde": {
            "bandwidth": result.kde.bandwidth,
            "n_points": result.kde.n_points,
            "conventions": dict(SILVERMAN_CONVENTIONS),
        },
    }


def band_tag(band: tuple[float, float]) -> str:
    return f"{band[0]:g}_{band[1]:g}"


def write_artifacts(result: PipelineResult, output_dir: str | Path | None = None) -> list[Path]:
    """Write every artifact; returns the paths written."""
    out = Path(result.config.output_dir if output_dir is None else output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "scores.csv"
    eio.export_scores_csv(result.table, path)
    written.append(path)

    path = out / "fit_report.json"
    eio.write_json(fit_report_document(result), path)
    written.append(path)

    path = out / "density_samples.csv"
    eio.export_density_samples_csv(
        result.gmm, result.kde, path, result.config.density_samples
    )
    written.append(path)

    for name, tree in (("tree_full.dot", result.tree_full), ("tree_pruned.dot", result.tree_pruned)):
        path = out / name
        eio.export_dot(tree, path)
        written.append(path)

    lattice_by_band = dict(result.lattices)
    for band, ctx in result.band_contexts:
        tag = band_tag(band)
        path = out / f"band_{tag}.cxt"
        eio.export_cxt(ctx, path)
        written.append(path)
        path = out / f"lattice_{tag}.dot"
        eio.export_dot(lattice_by_band[band], path)
        written.append(path)
        path = out / f"supports_{tag}.csv"
        eio.export_supports_csv(ctx, path)
        written.append(path)
    return written


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Compute everything and write the artifact set to cfg.output_dir."""
    result = prepare(cfg)
    write_artifacts(result)
    return result
