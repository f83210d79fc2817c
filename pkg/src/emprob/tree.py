"""Gini decision tree over answer indicators.

Splits are binary tests "answer present / absent".  Split selection and
pruning avoid float comparisons: candidate splits are ranked by the exact
rational form of the weighted Gini criterion (integer cross-multiplication),
and cost-complexity pruning uses Fractions.  Ties between equally good
splits resolve to the lowest answer index in questionnaire order, and label
ties inside a node resolve to the lowest category, so rebuilding the tree on
the same inputs is deterministic down to the last node.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from emprob.cases import CaseSet, CaseVector
from emprob.schema import ValidationError


@dataclass
class TreeNode:
    """One node; a leaf when split_answer_index is None."""

    counts: tuple[int, ...]
    prediction: int
    impurity: float
    depth: int
    split_answer_index: int | None = None
    split_answer_id: str | None = None
    gain: float | None = None
    true_child: "TreeNode | None" = None
    false_child: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.split_answer_index is None

    @property
    def n_samples(self) -> int:
        return sum(self.counts)

    @property
    def percentages(self) -> tuple[float, ...]:
        """Per-category share of this node's cases, in percent."""
        n = self.n_samples
        return tuple(100.0 * c / n for c in self.counts)


def _gini(counts: Sequence[int]) -> float:
    n = sum(counts)
    if n == 0:
        return 0.0
    return 1.0 - sum((c / n) ** 2 for c in counts)


def _majority(counts: Sequence[int]) -> int:
    # first maximum wins, preferring the lowest category on ties
    best = 0
    for k, c in enumerate(counts):
        if c > counts[best]:
            best = k
    return best


def build_tree(
    matrix: np.ndarray,
    labels: np.ndarray,
    answer_ids: Sequence[str],
    *,
    n_labels: int = 3,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
) -> TreeNode:
    """Grow a full binary Gini tree.

    Parameters
    ----------
    matrix : bool array, shape (n_cases, n_answers)
        Answer indicators, columns in questionnaire order.
    labels : int array, shape (n_cases,)
        Class of each case, values in [0, n_labels).
    answer_ids : sequence of str
        Column names, used to label splits.
    n_labels : int
        Number of classes.
    max_depth : int or None
        Optional growth cap; None grows until nodes are pure or unsplittable.
    min_samples_leaf : int
        Smallest admissible child size for a split.

    A node splits only when some partition strictly lowers the weighted Gini
    impurity, compared in exact rational arithmetic.
    """
    matrix = np.asarray(matrix, dtype=bool)
    labels = np.asarray(labels)
    if matrix.ndim != 2 or matrix.shape[1] != len(answer_ids):
        raise ValidationError("matrix shape does not match answer ids")
    if labels.shape != (matrix.shape[0],):
        raise ValidationError("labels length does not match matrix rows")
    if matrix.shape[0] == 0:
        raise ValidationError("cannot build a tree from zero cases")
    if labels.min() < 0 or labels.max() >= n_labels:
        raise ValidationError(f"labels must lie in [0, {n_labels})")
    if min_samples_leaf < 1:
        raise ValidationError("min_samples_leaf must be at least 1")
    answer_ids = tuple(answer_ids)

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        node_counts = tuple(int(c) for c in np.bincount(labels[idx], minlength=n_labels))
        node = TreeNode(
            counts=node_counts,
            prediction=_majority(node_counts),
            impurity=_gini(node_counts),
            depth=depth,
        )
        n = int(idx.size)
        parent_sq = sum(c * c for c in node_counts)
        if max(node_counts) == n:  # pure
            return node
        if max_depth is not None and depth >= max_depth:
            return node

        # S(split) = sum(cL^2)/nL + sum(cR^2)/nR as an exact fraction;
        # maximizing S minimizes weighted child impurity
        best_num = parent_sq  # S(no split) = parent_sq / n
        best_den = n
        best_j = None
        best_left: tuple[int, ...] | None = None
        for j in range(len(answer_ids)):
            col = matrix[idx, j]
            n_left = int(col.sum())
            if n_left < min_samples_leaf or n - n_left < min_samples_leaf:
                continue
            left_counts = tuple(
                int(c) for c in np.bincount(labels[idx[col]], minlength=n_labels)
            )
            right_counts = tuple(a - b for a, b in zip(node_counts, left_counts))
            n_right = n - n_left
            a_sq = sum(c * c for c in left_counts)
            b_sq = sum(c * c for c in right_counts)
            num = a_sq * n_right + b_sq * n_left
            den = n_left * n_right
            # strict improvement, first best j kept on ties
            if num * best_den > best_num * den:
                best_num, best_den, best_j, best_left = num, den, j, left_counts
        if best_j is None:
            return node

        col = matrix[idx, best_j]
        true_idx = idx[col]
        false_idx = idx[~col]
        node.split_answer_index = best_j
        node.split_answer_id = answer_ids[best_j]
        true_child = grow(true_idx, depth + 1)
        false_child = grow(false_idx, depth + 1)
        node.true_child = true_child
        node.false_child = false_child
        node.gain = node.impurity - (
            true_idx.size * true_child.impurity + false_idx.size * false_child.impurity
        ) / n
        return node

    return grow(np.arange(matrix.shape[0]), 0)


def fit_decision_tree(
    cases: CaseSet,
    categories: np.ndarray,
    *,
    n_labels: int = 3,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
) -> TreeNode:
    """Grow a tree explaining per-case categories by answer indicators."""
    return build_tree(
        cases.matrix,
        np.asarray(categories),
        cases.answer_ids,
        n_labels=n_labels,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )


def iter_nodes(root: TreeNode) -> Iterator[TreeNode]:
    """Preorder traversal."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if not node.is_leaf:
            stack.append(node.false_child)  # type: ignore[arg-type]
            stack.append(node.true_child)  # type: ignore[arg-type]


def leaf_count(root: TreeNode) -> int:
    return sum(1 for n in iter_nodes(root) if n.is_leaf)


def node_count(root: TreeNode) -> int:
    return sum(1 for _ in iter_nodes(root))


def tree_depth(root: TreeNode) -> int:
    return max(n.depth for n in iter_nodes(root))


def _leaf_error(node: TreeNode) -> int:
    return node.n_samples - max(node.counts)


def _subtree_error(node: TreeNode) -> int:
    if node.is_leaf:
        return _leaf_error(node)
    return _subtree_error(node.true_child) + _subtree_error(node.false_child)


def _subtree_leaves(node: TreeNode) -> int:
    if node.is_leaf:
        return 1
    return _subtree_leaves(node.true_child) + _subtree_leaves(node.false_child)


def _weakest_link(node: TreeNode, n_total: int) -> Fraction | None:
    """Minimal g over internal nodes of this subtree, None for a leaf."""
    if node.is_leaf:
        return None
    g = Fraction(_leaf_error(node) - _subtree_error(node), n_total * (_subtree_leaves(node) - 1))
    for child in (node.true_child, node.false_child):
        cg = _weakest_link(child, n_total)
        if cg is not None and cg < g:
            g = cg
    return g


def prune_tree(root: TreeNode, alpha: float, n_total: int | None = None) -> TreeNode:
    """Minimal cost-complexity pruning.

    Repeatedly collapses every internal node whose link strength
    g(t) = (R_leaf(t) - R_subtree(t)) / (leaves(t) - 1), with errors
    normalized by the total sample count, is the current minimum, while that
    minimum stays strictly below alpha.  alpha=0 returns an unchanged copy.
    The input tree is not modified.
    """
    if alpha < 0:
        raise ValidationError("alpha must be nonnegative")
    root = copy.deepcopy(root)
    if n_total is None:
        n_total = root.n_samples

    def collapse_equal(node: TreeNode, g_min: Fraction) -> None:
        if node.is_leaf:
            return
        g = Fraction(
            _leaf_error(node) - _subtree_error(node),
            n_total * (_subtree_leaves(node) - 1),
        )
        if g == g_min:
            node.split_answer_index = None
            node.split_answer_id = None
            node.gain = None
            node.true_child = None
            node.false_child = None
            return
        collapse_equal(node.true_child, g_min)
        collapse_equal(node.false_child, g_min)

    while not root.is_leaf:
        g_min = _weakest_link(root, n_total)
        if g_min is None or not (g_min < alpha):
            break
        collapse_equal(root, g_min)
    return root


def predict(root: TreeNode, case: CaseVector) -> int:
    """Class of a case by walking the tree."""
    node = root
    while not node.is_leaf:
        node = node.true_child if node.split_answer_id in case else node.false_child
    return node.prediction


def predict_matrix(root: TreeNode, matrix: np.ndarray) -> np.ndarray:
    """Classes for every row of an indicator matrix."""
    matrix = np.asarray(matrix, dtype=bool)
    out = np.empty(matrix.shape[0], dtype=int)
    for i in range(matrix.shape[0]):
        node = root
        while not node.is_leaf:
            node = node.true_child if matrix[i, node.split_answer_index] else node.false_child
        out[i] = node.prediction
    return out
