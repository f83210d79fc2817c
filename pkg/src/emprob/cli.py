"""Command-line interface.

Subcommands cover the pipeline stages individually plus one full run:

- enumerate: case-space size summary
- fit: density fit report and sampled curves
- score: the per-case score table
- tree: decision-tree exports (full and pruned)
- lattice: per-band context, lattice, and support exports
- report: everything the pipeline produces
- score-patient: score one answer combination, printed as JSON

Configuration comes from an optional JSON config file plus flag overrides.
Exit codes: 0 on success, 2 on validation errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from emprob import io as eio
from emprob.cases import enumerate_cases
from emprob.pipeline import (
    PipelineConfig,
    band_tag,
    fit_report_document,
    load_inputs,
    prepare,
    write_artifacts,
)
from emprob.schema import ValidationError
from emprob.scoring import score_patient
from emprob.tree import leaf_count, node_count, tree_depth

_CONFIG_FLAGS = (
    # (flag, config key, type, help)
    ("--questionnaire", "questionnaire_path", str, "questionnaire JSON path (default: shipped data)"),
    ("--weights", "weights_path", str, "weight matrix CSV path (default: shipped data)"),
    ("--output-dir", "output_dir", str, "directory for written artifacts"),
    ("--m-max", "m_max", int, "largest component count to try during selection"),
    ("--em-tol", "em_tol", float, "relative log-likelihood convergence tolerance"),
    ("--em-max-iter", "em_max_iter", int, "iteration cap per fit"),
    ("--prune-alpha", "prune_alpha", float, "cost-complexity pruning strength"),
    ("--tree-max-depth", "tree_max_depth", int, "depth cap for the decision tree"),
    ("--min-samples-leaf", "min_samples_leaf", int, "smallest admissible leaf size"),
    ("--density-samples", "density_samples", int, "grid size for the density-curve export"),
    ("--band-approach", "band_approach", int, "score used for banding: 1, 2, or 3"),
)


def _n_components(text: str) -> int | str:
    # "auto" passes through; config_from_args maps it to None there, since a
    # None here would look like the flag was never given
    if text == "auto":
        return "auto"
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emprob",
        description="Batch probability scoring over a questionnaire case space.",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    for flag, _, typ, help_text in _CONFIG_FLAGS:
        parser.add_argument(flag, type=typ, help=help_text)
    parser.add_argument(
        "--n-components",
        type=_n_components,
        metavar="M",
        help="mixture size, or 'auto' to pick by information criterion",
    )
    parser.add_argument(
        "--thresholds",
        type=float,
        nargs=2,
        metavar=("T1", "T2"),
        help="category boundaries, 0 < T1 < T2 < 1",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", help="print the case-space size")
    sub.add_parser("fit", help="write the fit report and density samples")
    sub.add_parser("score", help="write the score table")
    sub.add_parser("tree", help="write the decision-tree DOT files")
    sub.add_parser("lattice", help="write per-band CXT, lattice DOT, and supports")
    sub.add_parser("report", help="write every artifact")
    sp = sub.add_parser("score-patient", help="score one answer combination")
    sp.add_argument("answers", help="comma-separated answer ids, e.g. a_1_q1,a_2_q2")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    doc: dict = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ValidationError(f"{args.config}: config must be a key/value document")
        doc.update(loaded)
    for flag, key, _, _ in _CONFIG_FLAGS:
        value = getattr(args, flag.lstrip("-").replace("-", "_"))
        if value is not None:
            doc[key] = value
    if args.n_components is not None:
        doc["n_components"] = None if args.n_components == "auto" else args.n_components
    if args.thresholds is not None:
        doc["thresholds"] = tuple(args.thresholds)
    return PipelineConfig.from_mapping(doc)


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _announce(paths: list[Path]) -> None:
    for p in paths:
        print(f"wrote {p}")


def cmd_enumerate(cfg: PipelineConfig) -> int:
    questionnaire, _ = load_inputs(cfg)
    case_set = enumerate_cases(questionnaire)
    print(f"questions: {len(questionnaire.questions)}")
    print(f"answers: {len(questionnaire.answer_ids)}")
    print(f"cases: {len(case_set)}")
    return 0


def cmd_fit(cfg: PipelineConfig) -> int:
    result = prepare(cfg)
    out = _out_dir(cfg)
    report_path = out / "fit_report.json"
    eio.write_json(fit_report_document(result), report_path)
    samples_path = out / "density_samples.csv"
    eio.export_density_samples_csv(result.gmm, result.kde, samples_path, cfg.density_samples)
    sel = result.selection
    print(
        f"selected {result.gmm.n_components} components "
        f"(AIC favors {sel.aic_best_m}, BIC favors {sel.bic_best_m})"
    )
    _announce([report_path, samples_path])
    return 0


def cmd_score(cfg: PipelineConfig) -> int:
    result = prepare(cfg)
    path = _out_dir(cfg) / "scores.csv"
    eio.export_scores_csv(result.table, path)
    print(f"scored {len(result.table)} cases")
    _announce([path])
    return 0


def cmd_tree(cfg: PipelineConfig) -> int:
    result = prepare(cfg)
    out = _out_dir(cfg)
    paths = []
    for name, tree in (("tree_full.dot", result.tree_full), ("tree_pruned.dot", result.tree_pruned)):
        path = out / name
        eio.export_dot(tree, path)
        paths.append(path)
        print(
            f"{name}: {node_count(tree)} nodes, {leaf_count(tree)} leaves, "
            f"depth {tree_depth(tree)}"
        )
    _announce(paths)
    return 0


def cmd_lattice(cfg: PipelineConfig) -> int:
    result = prepare(cfg)
    out = _out_dir(cfg)
    paths = []
    lattice_by_band = dict(result.lattices)
    for band, ctx in result.band_contexts:
        tag = band_tag(band)
        lattice = lattice_by_band[band]
        print(
            f"band [{band[0]:g}, {band[1]:g}): {ctx.n_objects} cases, "
            f"{len(lattice.concepts)} concepts"
        )
        eio.export_cxt(ctx, out / f"band_{tag}.cxt")
        eio.export_dot(lattice, out / f"lattice_{tag}.dot")
        eio.export_supports_csv(ctx, out / f"supports_{tag}.csv")
        paths += [out / f"band_{tag}.cxt", out / f"lattice_{tag}.dot", out / f"supports_{tag}.csv"]
    _announce(paths)
    return 0


def cmd_report(cfg: PipelineConfig) -> int:
    result = prepare(cfg)
    paths = write_artifacts(result)
    print(f"scored {len(result.table)} cases")
    _announce(paths)
    return 0


def cmd_score_patient(cfg: PipelineConfig, answers: str) -> int:
    ids = tuple(a.strip() for a in answers.split(",") if a.strip())
    if not ids:
        raise ValidationError("no answer ids given")
    result = prepare(cfg)
    ps = score_patient(ids, result.bundle, thresholds=cfg.thresholds)
    doc = {
        "answers": sorted(ps.case.true_answers),
        "raw_sum": ps.raw_sum,
        "normalized_sum": ps.normalized,
        "clamped": ps.clamped,
        "p_gmm_cdf": ps.score_gmm_cdf,
        "p_kde_cdf": ps.score_kde_cdf,
        "p_posterior": ps.score_posterior,
        "category": ps.category.name,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "enumerate":
            return cmd_enumerate(cfg)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "score":
            return cmd_score(cfg)
        if args.command == "tree":
            return cmd_tree(cfg)
        if args.command == "lattice":
            return cmd_lattice(cfg)
        if args.command == "report":
            return cmd_report(cfg)
        if args.command == "score-patient":
            return cmd_score_patient(cfg, args.answers)
        parser.error(f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001  (CLI boundary)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
