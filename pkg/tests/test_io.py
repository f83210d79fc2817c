import json

import numpy as np
import pytest

from emprob import (
    ConceptLattice,
    FormalContext,
    ValidationError,
    build_lattice,
    export_cxt,
    export_density_samples_csv,
    export_dot,
    export_scores_csv,
    export_supports_csv,
    fit_decision_tree,
    format_float,
    lattice_to_dot,
    read_cxt,
    read_scores_csv,
    tree_to_dot,
    write_json,
)

DIAGONAL = FormalContext(
    objects=("case_a", "case_b"),
    attributes=("y1", "y2"),
    incidence=np.eye(2, dtype=bool),
)


def test_format_float_round_trips():
    rng = np.random.default_rng(3)
    values = [0.0, 1.0, -1.5, 7.2, 1e-300, 1e300, np.pi, 1 / 3]
    values.extend(rng.standard_normal(50))
    for v in values:
        assert float(format_float(v)) == float(v)
    assert format_float(7.2) == "7.2000000000000002"


def test_export_cxt_layout(tmp_path):
    path = tmp_path / "ctx.cxt"
    export_cxt(DIAGONAL, path)
    assert path.read_text() == (
        "B\n\n2\n2\n\ncase_a\ncase_b\ny1\ny2\nX.\n.X\n"
    )


def test_cxt_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    for k in range(5):
        n_obj = int(rng.integers(1, 9))
        n_att = int(rng.integers(1, 9))
        ctx = FormalContext(
            objects=tuple(f"o{i}" for i in range(n_obj)),
            attributes=tuple(f"y{j}" for j in range(n_att)),
            incidence=rng.random((n_obj, n_att)) < 0.5,
        )
        path = tmp_path / f"round_{k}.cxt"
        export_cxt(ctx, path)
        back = read_cxt(path)
        assert back.objects == ctx.objects
        assert back.attributes == ctx.attributes
        np.testing.assert_array_equal(back.incidence, ctx.incidence)


def test_export_cxt_rejects_newline_in_name(tmp_path):
    bad = FormalContext(
        objects=("one\ntwo",), attributes=("y",),
        incidence=np.ones((1, 1), dtype=bool),
    )
    with pytest.raises(ValidationError):
        export_cxt(bad, tmp_path / "bad.cxt")


def test_read_cxt_errors(tmp_path):
    cases = {
        "no_header.cxt": "2\n2\n",
        "bad_counts.cxt": "B\n\ntwo\n2\n",
        "truncated.cxt": "B\n\n2\n2\n\no1\no2\ny1\ny2\nX.\n",
        "bad_row.cxt": "B\n\n1\n2\n\no1\ny1\ny2\nXQ\n",
        "short_row.cxt": "B\n\n1\n2\n\no1\ny1\ny2\nX\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(ValidationError):
            read_cxt(path)


def test_scores_csv_round_trip(score_table, tmp_path):
    path = tmp_path / "scores.csv"
    export_scores_csv(score_table, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1537
    parsed = read_scores_csv(path)
    assert parsed.case_ids == tuple(range(1536))
    assert parsed.answer_ids == score_table.answer_ids
    np.testing.assert_array_equal(parsed.matrix, score_table.case_set.matrix)
    np.testing.assert_array_equal(parsed.raw_sums, score_table.raw_sums)
    np.testing.assert_array_equal(parsed.normalized, score_table.normalized)
    np.testing.assert_array_equal(parsed.score_gmm_cdf, score_table.score_gmm_cdf)
    np.testing.assert_array_equal(parsed.score_kde_cdf, score_table.score_kde_cdf)
    np.testing.assert_array_equal(parsed.score_posterior, score_table.score_posterior)
    np.testing.assert_array_equal(parsed.category, score_table.category)


def test_scores_csv_full_precision(score_table, tmp_path):
    path = tmp_path / "scores.csv"
    export_scores_csv(score_table, path)
    first = path.read_text().splitlines()[1]
    # raw sum of the all-first-answers case is 7.2; the cell must carry all
    # 17 significant digits, not a shortest-repr rendering
    assert ",7.2000000000000002," in first


def test_read_scores_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("")
    with pytest.raises(ValidationError):
        read_scores_csv(path)
    path.write_text("case,oops\n")
    with pytest.raises(ValidationError):
        read_scores_csv(path)
    header = ("case_id,a_1_q1,raw_sum,normalized_sum,"
              "p_gmm_cdf,p_kde_cdf,p_posterior,category\n")
    path.write_text(header + "0,1,0.5\n")
    with pytest.raises(ValidationError):
        read_scores_csv(path)
    path.write_text(header + "0,1,0.5,0.5,0.5,0.5,0.5,BOGUS\n")
    with pytest.raises(ValidationError):
        read_scores_csv(path)


def test_density_samples_csv(gmm, kde, tmp_path):
    path = tmp_path / "density.csv"
    export_density_samples_csv(gmm, kde, path, n_samples=5)
    lines = path.read_text().splitlines()
    assert lines[0] == ("x,gmm_pdf,component_1_pdf,component_2_pdf,"
                        "kde_pdf,p_gmm_cdf,p_kde_cdf,p_posterior")
    assert len(lines) == 6
    table = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    xs = np.linspace(0.0, 1.0, 5)
    np.testing.assert_array_equal(table[:, 0], xs)
    np.testing.assert_array_equal(table[:, 1], gmm.pdf(xs))
    np.testing.assert_allclose(table[:, 1], table[:, 2] + table[:, 3], rtol=1e-12)
    np.testing.assert_array_equal(table[:, 4], kde.pdf(xs))
    np.testing.assert_array_equal(table[:, 5], gmm.cdf(xs))
    np.testing.assert_array_equal(table[:, 6], kde.cdf(xs))
    k = int(np.argmax(gmm.means))
    np.testing.assert_array_equal(table[:, 7], gmm.posterior(xs, k))


def test_tree_dot_single_leaf(case_set):
    tree = fit_decision_tree(case_set, np.zeros(len(case_set), dtype=int))
    text = tree_to_dot(tree)
    assert text.startswith("digraph decision_tree {")
    assert text.count("[label=") == 1
    assert "->" not in text
    assert "LOW 100.0% (1536 of 1536)" in text
    assert "fillcolor=lightgrey" in text


def test_tree_dot_real_tree(tree_full):
    text = tree_to_dot(tree_full)
    # root line: tested answer, then majority and counts on DOT-escaped
    # newlines (single backslash in the file)
    assert '"a_1_q3?\\nMEDIUM 34.5% (530 of 1536)\\ncounts 508/530/498"' in text
    assert text.count("label=yes") == text.count("label=no")
    assert "\\\\n" not in text


def test_lattice_dot_diamond():
    lattice = build_lattice(DIAGONAL)
    text = lattice_to_dot(lattice)
    assert text.startswith("digraph concept_lattice {")
    assert text.count("[label=") == 4
    assert text.count("->") == 4
    assert '"|extent| = 2"' in text
    assert '"y1\\n|extent| = 1"' in text
    assert '"y2\\n|extent| = 1"' in text
    # the bottom concept inherits both attributes from its covers, so it
    # introduces none and shows only its extent size
    assert '"|extent| = 0"' in text


def test_dot_escapes_quotes_in_names():
    ctx = FormalContext(
        objects=("o",), attributes=('say "hi"',),
        incidence=np.ones((1, 1), dtype=bool),
    )
    text = lattice_to_dot(build_lattice(ctx))
    assert '\\"hi\\"' in text


def test_export_dot_dispatch(tree_full, tmp_path):
    tree_path = tmp_path / "tree.dot"
    export_dot(tree_full, tree_path)
    assert tree_path.read_text() == tree_to_dot(tree_full)
    lattice = build_lattice(DIAGONAL)
    assert isinstance(lattice, ConceptLattice)
    lattice_path = tmp_path / "lattice.dot"
    export_dot(lattice, lattice_path)
    assert lattice_path.read_text() == lattice_to_dot(lattice)
    with pytest.raises(ValidationError):
        export_dot("not a graph", tmp_path / "nope.dot")


def test_supports_csv(tmp_path):
    ctx = FormalContext(
        objects=("o1", "o2", "o3"),
        attributes=("y1", "y2"),
        incidence=np.array([[1, 1], [0, 1], [0, 1]], dtype=bool),
    )
    path = tmp_path / "supports.csv"
    export_supports_csv(ctx, path)
    assert path.read_text() == (
        "attributes,support\ny1,1\ny2,3\ny1;y2,1\n"
    )


def test_write_json(tmp_path):
    path = tmp_path / "doc.json"
    write_json({"zeta": 1, "alpha": {"b": [1, 2], "a": 0.5}}, path)
    text = path.read_text()
    assert text.endswith("\n")
    assert text.index('"alpha"') < text.index('"zeta"')
    assert json.loads(text) == {"zeta": 1, "alpha": {"b": [1, 2], "a": 0.5}}
    write_json({"zeta": 1, "alpha": {"b": [1, 2], "a": 0.5}}, tmp_path / "doc2.json")
    assert (tmp_path / "doc2.json").read_bytes() == path.read_bytes()
