"""Shared fixtures; expensive fits run once per session."""

import numpy as np
import pytest

from emprob import (
    GaussianMixture,
    KernelDensityEstimate,
    ModelBundle,
    WeightMatrix,
    default_questionnaire,
    default_weight_matrix,
    elicit_probabilities,
    em_fit,
    enumerate_cases,
    fit_decision_tree,
    load_questionnaire,
    mean_weights,
    weight_sum_table,
)

# q_1 with the four flu-like symptoms listed separately (22 answers total);
# the embedded merge rule collapses them back into the shipped schema.
UNMERGED_SYMPTOM_IDS = ("a_21_q1", "a_22_q1", "a_23_q1", "a_24_q1")


def unmerged_questionnaire_doc():
    base = default_questionnaire()
    doc = {"questions": [], "merge_rules": [
        {
            "source_answer_ids": list(UNMERGED_SYMPTOM_IDS),
            "merged_answer": {"id": "a_2_q1", "label": "Fever/ Fatigue/ Faintness/ Headache"},
        }
    ]}
    for q in base.questions:
        answers = []
        for a in q.answers:
            if a.id == "a_2_q1":
                for sid, label in zip(
                    UNMERGED_SYMPTOM_IDS, ("Fever", "Fatigue", "Faintness", "Headache")
                ):
                    answers.append({"id": sid, "label": label})
            else:
                answers.append({"id": a.id, "label": a.label})
        doc["questions"].append(
            {
                "id": q.id,
                "label": q.label,
                "mode": q.mode.value,
                "answers": answers,
                "none_answer_id": q.none_answer_id,
            }
        )
    return doc


def unmerged_questionnaire():
    return load_questionnaire(unmerged_questionnaire_doc())


def unmerged_weight_matrix():
    """15x22 matrix whose merge reproduces the shipped 15x19 matrix exactly.

    Doctor d_4's four symptom weights are distinct values averaging 0.75;
    every other doctor repeats their merged value four times.
    """
    wm = default_weight_matrix()
    col = wm.answer_ids.index("a_2_q1")
    ids = wm.answer_ids[:col] + UNMERGED_SYMPTOM_IDS + wm.answer_ids[col + 1 :]
    rows = []
    for d, row in zip(wm.doctors, wm.values):
        v = row[col]
        four = (1.0, 0.5, 1.5, 0.0) if d == "d_4" else (v, v, v, v)
        rows.append(list(row[:col]) + list(four) + list(row[col + 1 :]))
    return WeightMatrix(doctors=wm.doctors, answer_ids=ids, values=np.array(rows))

# Reference two-component parameters (mixture weights, means, sigmas).
REFERENCE_GMM = GaussianMixture(
    weights=(0.364801, 0.635199),
    means=(0.359548, 0.572878),
    sigmas=(0.128782, 0.156241),
)


@pytest.fixture(scope="session")
def questionnaire():
    return default_questionnaire()


@pytest.fixture(scope="session")
def weight_matrix():
    return default_weight_matrix()


@pytest.fixture(scope="session")
def mean_vector(weight_matrix):
    return mean_weights(weight_matrix)


@pytest.fixture(scope="session")
def case_set(questionnaire):
    return enumerate_cases(questionnaire)


@pytest.fixture(scope="session")
def sum_table(case_set, mean_vector):
    return weight_sum_table(case_set, mean_vector)


@pytest.fixture(scope="session")
def fitted_gmm(sum_table):
    model, report = em_fit(sum_table.normalized, 2)
    return model, report


@pytest.fixture(scope="session")
def gmm(fitted_gmm):
    return fitted_gmm[0]


@pytest.fixture(scope="session")
def kde(sum_table):
    return KernelDensityEstimate.from_data(sum_table.normalized)


@pytest.fixture(scope="session")
def score_table(sum_table, gmm, kde):
    return elicit_probabilities(sum_table, gmm, kde)


@pytest.fixture(scope="session")
def reference_score_table(sum_table, kde):
    return elicit_probabilities(sum_table, REFERENCE_GMM, kde)


@pytest.fixture(scope="session")
def tree_full(case_set, score_table):
    return fit_decision_tree(case_set, score_table.category)


@pytest.fixture(scope="session")
def bundle(questionnaire, mean_vector, sum_table, gmm, kde):
    return ModelBundle(
        questionnaire=questionnaire,
        mean_weight_vector=mean_vector,
        raw_min=sum_table.raw_min,
        raw_max=sum_table.raw_max,
        gmm=gmm,
        kde=kde,
    )
