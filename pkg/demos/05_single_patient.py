"""
Scoring one patient
===================

The batch table covers the whole case space, but scoring a single answer
combination needs no table: a model bundle (questionnaire, mean weights,
normalization bounds, fitted models) scores any admissible case, exactly
matching its batch row. The same path backs `emprob score-patient`.
"""

from emprob import (
    KernelDensityEstimate,
    ModelBundle,
    default_questionnaire,
    default_weight_matrix,
    em_fit,
    enumerate_cases,
    mean_weights,
    score_patient,
    weight_sum_table,
)

questionnaire = default_questionnaire()
vector = mean_weights(default_weight_matrix())
table = weight_sum_table(enumerate_cases(questionnaire), vector)
gmm, _ = em_fit(table.normalized, 2)

bundle = ModelBundle(
    questionnaire=questionnaire,
    mean_weight_vector=vector,
    raw_min=table.raw_min,
    raw_max=table.raw_max,
    gmm=gmm,
    kde=KernelDensityEstimate.from_data(table.normalized),
)

# three presentations: textbook-looking, all-favorable, and all-adverse
patients = {
    "growing rash, one bite, outdoors": (
        "a_2_q1", "a_3_q2", "a_1_q3", "a_1_q4", "a_2_q5", "a_1_q6"
    ),
    "no symptoms, nothing observed": (
        "a_1_q1", "a_1_q2", "a_2_q3", "a_2_q4", "a_1_q5", "a_2_q6"
    ),
    "every high-weight answer": (
        "a_2_q1", "a_3_q1", "a_3_q2", "a_1_q3", "a_1_q4", "a_4_q5", "a_1_q6"
    ),
}
for name, answers in patients.items():
    ps = score_patient(answers, bundle)
    print(f"{name}:")
    print(f"  raw sum {ps.raw_sum:.4f}, normalized {ps.normalized:.4f}")
    print(
        f"  mixture cdf {ps.score_gmm_cdf:.4f}, kernel cdf "
        f"{ps.score_kde_cdf:.4f}, posterior {ps.score_posterior:.4f}"
    )
    print(f"  category: {ps.category.name}")

# a raw sum outside the fitted bounds is clamped and flagged rather than
# extrapolated; with the shipped data the bounds are the observed extremes
ps = score_patient(patients["every high-weight answer"], bundle)
print(f"\nclamped for the extreme case: {ps.clamped}")
