"""Serialization: Burmeister contexts, DOT diagrams, CSV and JSON tables.

All writers are deterministic: fixed column orders, sorted JSON keys, no
timestamps, floats rendered with 17 significant digits so values round-trip
exactly and re-running a pipeline reproduces files byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from emprob.fca import ConceptLattice, FormalContext
from emprob.schema import ValidationError
from emprob.scoring import ProbabilityCategory, ScoreTable
from emprob.tree import TreeNode, iter_nodes

CATEGORY_NAMES = tuple(c.name for c in ProbabilityCategory)

SCORE_COLUMNS = ("raw_sum", "normalized_sum", "p_gmm_cdf", "p_kde_cdf", "p_posterior")


def format_float(x: float) -> str:
    """17-significant-digit decimal rendering; round-trips any float64."""
    return format(float(x), ".17g")


def export_cxt(context: FormalContext, path: str | Path) -> None:
    """Write a formal context in Burmeister format.

    Layout: a ``B`` line, a blank line, the object and attribute counts, a
    blank line, one line per object name, one per attribute name, then one
    incidence row per object using ``X`` and ``.``.
    """
    for name in (*context.objects, *context.attributes):
        if "\n" in name or "\r" in name:
            raise ValidationError(f"name contains a newline: {name!r}")
    lines = ["B", "", str(context.n_objects), str(context.n_attributes), ""]
    lines.extend(context.objects)
    lines.extend(context.attributes)
    for row in context.incidence:
        lines.append("".join("X" if v else "." for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_cxt(path: str | Path) -> FormalContext:
    """Read a Burmeister context file written by export_cxt."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "B":
        raise ValidationError(f"{path}: not a Burmeister context (missing 'B' header)")
    body = [ln for ln in lines[1:] if ln.strip() != ""]
    try:
        n_obj = int(body[0])
        n_att = int(body[1])
    except (IndexError, ValueError):
        raise ValidationError(f"{path}: malformed object/attribute counts") from None
    expected = 2 + n_obj + n_att + n_obj
    if len(body) < expected:
        raise ValidationError(f"{path}: truncated context file")
    objects = tuple(body[2 : 2 + n_obj])
    attributes = tuple(body[2 + n_obj : 2 + n_obj + n_att])
    rows = body[2 + n_obj + n_att : expected]
    inc = np.zeros((n_obj, n_att), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != n_att or any(ch not in "X." for ch in row):
            raise ValidationError(f"{path}: bad incidence row {i}: {row!r}")
        inc[i] = [ch == "X" for ch in row]
    return FormalContext(objects=objects, attributes=attributes, incidence=inc)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _dot_label(parts: Sequence[str]) -> str:
    # \n inside a quoted DOT string is a line break in the rendered label.
    return '"' + "\\n".join(_dot_escape(p) for p in parts) + '"'


def tree_to_dot(root: TreeNode, category_names: Sequence[str] = CATEGORY_NAMES) -> str:
    """Render a decision tree as a DOT digraph.

    Every node shows its majority category with that category's percentage
    and case count, plus the per-category counts; internal nodes lead with
    the tested answer.  Edges are labeled yes (answer present) and no.
    """
    lines = ["digraph decision_tree {", "  node [shape=box];"]
    ids: dict[int, str] = {}
    for k, node in enumerate(iter_nodes(root)):
        ids[id(node)] = f"n{k}"
    for node in iter_nodes(root):
        nid = ids[id(node)]
        pct = node.percentages[node.prediction]
        majority = (
            f"{category_names[node.prediction]} {pct:.1f}% "
            f"({node.counts[node.prediction]} of {node.n_samples})"
        )
        counts = "counts " + "/".join(str(c) for c in node.counts)
        if node.is_leaf:
            label = _dot_label([majority, counts])
            lines.append(f"  {nid} [label={label}, style=filled, fillcolor=lightgrey];")
        else:
            label = _dot_label([f"{node.split_answer_id}?", majority, counts])
            lines.append(f"  {nid} [label={label}];")
    for node in iter_nodes(root):
        if node.is_leaf:
            continue
        nid = ids[id(node)]
        lines.append(f"  {nid} -> {ids[id(node.true_child)]} [label=yes];")
        lines.append(f"  {nid} -> {ids[id(node.false_child)]} [label=no];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lattice_to_dot(lattice: ConceptLattice) -> str:
    """Render a concept lattice as a DOT digraph, edges pointing from super-
    to sub-concept.

    Each node shows the attributes introduced at that concept (those in its
    intent but in no upper neighbor's intent) and its extent size.
    """
    ctx = lattice.context
    upper_of: dict[int, list[int]] = {i: [] for i in range(len(lattice.concepts))}
    for lower, upper in lattice.edges:
        upper_of[lower].append(upper)
    lines = ["digraph concept_lattice {", "  node [shape=ellipse];"]
    for i, c in enumerate(lattice.concepts):
        inherited: set[int] = set()
        for u in upper_of[i]:
            inherited.update(lattice.concepts[u].intent)
        introduced = [a for a in c.intent if a not in inherited]
        names = ", ".join(ctx.attributes[a] for a in introduced)
        size = f"|extent| = {len(c.extent)}"
        label = _dot_label([names, size] if names else [size])
        lines.append(f"  c{i} [label={label}];")
    for lower, upper in lattice.edges:
        lines.append(f"  c{upper} -> c{lower};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(graph: TreeNode | ConceptLattice, path: str | Path) -> None:
    """Write a decision tree or concept lattice as a DOT file."""
    if isinstance(graph, TreeNode):
        text = tree_to_dot(graph)
    elif isinstance(graph, ConceptLattice):
        text = lattice_to_dot(graph)
    else:
        raise ValidationError(f"cannot render {type(graph).__name__} as DOT")
    Path(path).write_text(text, encoding="utf-8")


def export_scores_csv(table: ScoreTable, path: str | Path) -> None:
    """Write one row per case: case_id, answer indicators (0/1), raw and
    normalized sums, the three scores, and the category."""
    header = ["case_id", *table.answer_ids, *SCORE_COLUMNS, "category"]
    lines = [",".join(header)]
    matrix = table.case_set.matrix
    for i in range(len(table)):
        row = [str(i)]
        row.extend("1" if v else "0" for v in matrix[i])
        row.extend(format_float(v) for v in (
            table.raw_sums[i], table.normalized[i], table.score_gmm_cdf[i],
            table.score_kde_cdf[i], table.score_posterior[i],
        ))
        row.append(CATEGORY_NAMES[table.category[i]])
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class ParsedScores:
    """In-memory form of a scores CSV, for round-trip checks."""

    case_ids: tuple[int, ...]
    answer_ids: tuple[str, ...]
    matrix: np.ndarray
    raw_sums: np.ndarray
    normalized: np.ndarray
    score_gmm_cdf: np.ndarray
    score_kde_cdf: np.ndarray
    score_posterior: np.ndarray
    category: np.ndarray


def read_scores_csv(path: str | Path) -> ParsedScores:
    """Parse a scores CSV written by export_scores_csv."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty scores file")
    header = lines[0].split(",")
    tail = [*SCORE_COLUMNS, "category"]
    if header[0] != "case_id" or header[-len(tail):] != tail:
        raise ValidationError(f"{path}: unexpected scores header")
    answer_ids = tuple(header[1 : len(header) - len(tail)])
    n = len(lines) - 1
    case_ids = []
    matrix = np.zeros((n, len(answer_ids)), dtype=bool)
    floats = np.zeros((n, len(SCORE_COLUMNS)))
    category = np.zeros(n, dtype=int)
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValidationError(f"{path}: row {i} has {len(cells)} cells")
        case_ids.append(int(cells[0]))
        matrix[i] = [c == "1" for c in cells[1 : 1 + len(answer_ids)]]
        floats[i] = [float(c) for c in cells[1 + len(answer_ids) : -1]]
        try:
            category[i] = CATEGORY_NAMES.index(cells[-1])
        except ValueError:
            raise ValidationError(f"{path}: unknown category {cells[-1]!r}") from None
    return ParsedScores(
        case_ids=tuple(case_ids),
        answer_ids=answer_ids,
        matrix=matrix,
        raw_sums=floats[:, 0],
        normalized=floats[:, 1],
        score_gmm_cdf=floats[:, 2],
        score_kde_cdf=floats[:, 3],
        score_posterior=floats[:, 4],
        category=category,
    )


def export_density_samples_csv(gmm, kde, path: str | Path,
                               n_samples: int = 1001) -> None:
    """Tabulate the fitted curves on an even grid over [0, 1]: mixture pdf,
    each weighted component pdf, kernel pdf, and the three score curves."""
    xs = np.linspace(0.0, 1.0, n_samples)
    comp = gmm.component_pdfs(xs)
    curves = [("gmm_pdf", gmm.pdf(xs))]
    curves.extend(
        (f"component_{k + 1}_pdf", comp[:, k]) for k in range(gmm.n_components)
    )
    curves.extend([
        ("kde_pdf", kde.pdf(xs)),
        ("p_gmm_cdf", gmm.cdf(xs)),
        ("p_kde_cdf", kde.cdf(xs)),
        ("p_posterior", gmm.posterior(xs, int(np.argmax(gmm.means)))),
    ])
    lines = [",".join(["x"] + [name for name, _ in curves])]
    for i, x in enumerate(xs):
        lines.append(",".join([format_float(x)] + [format_float(col[i]) for _, col in curves]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_supports_csv(context: FormalContext, path: str | Path) -> None:
    """Support counts of every single attribute and every attribute pair."""
    lines = ["attributes,support"]
    atts = context.attributes
    for a in atts:
        lines.append(f"{a},{context.support([a])}")
    for i in range(len(atts)):
        for j in range(i + 1, len(atts)):
            lines.append(f"{atts[i]};{atts[j]},{context.support([atts[i], atts[j]])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(obj, path: str | Path) -> None:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
