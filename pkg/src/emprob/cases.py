"""Enumeration of admissible questionnaire cases and per-case weight sums.

A case assigns every question an admissible answer combination: exactly one
answer for an exclusive question; for a multi-select question either the
none-answer alone or a non-empty subset of the symptom answers.  Cases are
ordered canonically: questions vary like mixed-radix digits with the first
question most significant, each question running through its combinations in
canonical order (answer-list order for exclusive questions; none first, then
symptom subsets in binary-counting order).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from emprob.schema import (
    AnswerWeightVector,
    Question,
    QuestionMode,
    Questionnaire,
    ValidationError,
)


@dataclass(frozen=True)
class CaseVector:
    """One admissible response pattern, held as the set of true answers."""

    true_answers: frozenset[str]

    def __contains__(self, answer_id: str) -> bool:
        return answer_id in self.true_answers


def validate_case(case: CaseVector, questionnaire: Questionnaire) -> None:
    """Raise ValidationError unless the case is admissible."""
    known = set(questionnaire.answer_ids)
    unknown = case.true_answers - known
    if unknown:
        raise ValidationError(f"unknown answers in case: {sorted(unknown)}")
    for q in questionnaire.questions:
        chosen = case.true_answers & {a.id for a in q.answers}
        if q.mode is QuestionMode.EXCLUSIVE:
            if len(chosen) != 1:
                raise ValidationError(
                    f"question {q.id!r}: exactly one answer required, got {sorted(chosen)}"
                )
        else:
            none_id = q.none_answer_id
            if chosen == {none_id}:
                continue
            if not chosen:
                raise ValidationError(f"question {q.id!r}: no answer selected")
            if none_id in chosen:
                raise ValidationError(
                    f"question {q.id!r}: none-answer combined with symptoms {sorted(chosen)}"
                )


def _question_combination_index(q: Question, chosen: frozenset[str]) -> int:
    """Position of the chosen combination in q.combinations() order."""
    if q.mode is QuestionMode.EXCLUSIVE:
        (aid,) = chosen
        return [a.id for a in q.answers].index(aid)
    if chosen == {q.none_answer_id}:
        return 0
    bits = 0
    for i, aid in enumerate(q.selectable_answer_ids):
        if aid in chosen:
            bits |= 1 << i
    return bits


def canonical_index(case: CaseVector, questionnaire: Questionnaire) -> int:
    """Mixed-radix rank of the case in canonical enumeration order."""
    validate_case(case, questionnaire)
    idx = 0
    for q in questionnaire.questions:
        chosen = case.true_answers & {a.id for a in q.answers}
        idx = idx * q.combination_count() + _question_combination_index(q, chosen)
    return idx


def case_from_index(index: int, questionnaire: Questionnaire) -> CaseVector:
    """Inverse of canonical_index."""
    total = questionnaire.case_count()
    if not 0 <= index < total:
        raise ValidationError(f"case index {index} outside [0, {total})")
    digits = []
    rem = index
    for q in reversed(questionnaire.questions):
        n = q.combination_count()
        digits.append(rem % n)
        rem //= n
    digits.reverse()
    answers: set[str] = set()
    for q, d in zip(questionnaire.questions, digits):
        answers.update(q.combinations()[d])
    return CaseVector(true_answers=frozenset(answers))


class CaseSet:
    """All admissible cases in canonical order, as a boolean indicator matrix.

    Rows are cases, columns follow the questionnaire's answer order.
    """

    def __init__(self, questionnaire: Questionnaire):
        self.questionnaire = questionnaire
        self.answer_ids: tuple[str, ...] = questionnaire.answer_ids
        col = {a: i for i, a in enumerate(self.answer_ids)}
        per_question = [
            [[col[a] for a in combo] for combo in q.combinations()]
            for q in questionnaire.questions
        ]
        n = questionnaire.case_count()
        matrix = np.zeros((n, len(self.answer_ids)), dtype=bool)
        radices = [q.combination_count() for q in questionnaire.questions]
        for idx in range(n):
            rem = idx
            digits = []
            for r in reversed(radices):
                digits.append(rem % r)
                rem //= r
            digits.reverse()
            for combos, d in zip(per_question, digits):
                matrix[idx, combos[d]] = True
        matrix.setflags(write=False)
        self.matrix = matrix

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __iter__(self) -> Iterator[CaseVector]:
        for row in self.matrix:
            yield CaseVector(
                true_answers=frozenset(a for a, v in zip(self.answer_ids, row) if v)
            )

    def case(self, index: int) -> CaseVector:
        row = self.matrix[index]
        return CaseVector(
            true_answers=frozenset(a for a, v in zip(self.answer_ids, row) if v)
        )


def enumerate_cases(questionnaire: Questionnaire) -> CaseSet:
    """All admissible cases, exactly once, in canonical order."""
    return CaseSet(questionnaire)


def weight_sum(case: CaseVector, weights: AnswerWeightVector) -> float:
    """Sum of mean weights over the case's true answers.

    Summation follows the weight vector's answer order, so batch and
    single-case evaluation agree bit for bit.
    """
    known = set(weights.answer_ids)
    missing = case.true_answers - known
    if missing:
        raise ValidationError(f"case answers missing from weight vector: {sorted(missing)}")
    mask = np.fromiter(
        (a in case.true_answers for a in weights.answer_ids),
        dtype=bool,
        count=len(weights.answer_ids),
    )
    return float(weights.values[mask].sum())


def weight_sums(case_set: CaseSet, weights: AnswerWeightVector) -> np.ndarray:
    """Per-case weight sums for every case, in canonical order."""
    if tuple(weights.answer_ids) != tuple(case_set.answer_ids):
        raise ValidationError("weight vector answer order differs from case set")
    n = len(case_set)
    out = np.empty(n, dtype=float)
    values = weights.values
    matrix = case_set.matrix
    for i in range(n):
        out[i] = values[matrix[i]].sum()
    return out


@dataclass(frozen=True)
class WeightSumTable:
    """Raw and min-max normalized weight sums, with the bounds kept so that
    single cases can be normalized identically later."""

    raw_sums: np.ndarray
    normalized: np.ndarray
    raw_min: float
    raw_max: float
    case_set: CaseSet | None = None

    def __post_init__(self) -> None:
        raw = np.asarray(self.raw_sums, dtype=float)
        norm = np.asarray(self.normalized, dtype=float)
        if raw.shape != norm.shape or raw.ndim != 1:
            raise ValidationError("raw and normalized sums must be equal-length vectors")
        if norm.size and (norm.min() < 0.0 or norm.max() > 1.0):
            raise ValidationError("normalized sums must lie in [0, 1]")
        if self.case_set is not None and len(self.case_set) != raw.size:
            raise ValidationError("case set size does not match sums")
        for a in (raw, norm):
            a.setflags(write=False)
        object.__setattr__(self, "raw_sums", raw)
        object.__setattr__(self, "normalized", norm)

    def __len__(self) -> int:
        return int(self.raw_sums.size)


def normalize_sums(sums, case_set: CaseSet | None = None) -> WeightSumTable:
    """Min-max normalization of weight sums onto [0, 1].

    The minimum maps to 0 and the maximum to 1; the bounds are stored in the
    returned table.  A degenerate input (all sums equal) is an error since
    the affine map is undefined.
    """
    raw = np.asarray(sums, dtype=float)
    if raw.ndim != 1 or raw.size < 2:
        raise ValidationError("normalization needs at least two sums")
    if not np.all(np.isfinite(raw)):
        raise ValidationError("sums contain non-finite values")
    lo = float(raw.min())
    hi = float(raw.max())
    if hi == lo:
        raise ValidationError("cannot normalize: all case sums identical")
    return WeightSumTable(
        raw_sums=raw,
        normalized=(raw - lo) / (hi - lo),
        raw_min=lo,
        raw_max=hi,
        case_set=case_set,
    )


def weight_sum_table(case_set: CaseSet, weights: AnswerWeightVector) -> WeightSumTable:
    """Sums plus normalization for a whole case set in one step."""
    return normalize_sums(weight_sums(case_set, weights), case_set=case_set)
