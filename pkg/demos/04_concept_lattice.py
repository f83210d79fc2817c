"""
Formal concept analysis of a probability band
==============================================

Which answer patterns characterize the least-probable cases? Restricting
the score table to one probability band gives a formal context (cases x
answers); Next-Closure enumerates its concepts, and the covering relation
forms a lattice. Attribute supports summarize the band in one table.
"""

from pathlib import Path

from emprob import (
    KernelDensityEstimate,
    build_band_context,
    build_lattice,
    default_questionnaire,
    default_weight_matrix,
    derive,
    elicit_probabilities,
    em_fit,
    enumerate_cases,
    enumerate_concepts,
    export_cxt,
    export_dot,
    export_supports_csv,
    mean_weights,
    weight_sum_table,
)

questionnaire = default_questionnaire()
table = weight_sum_table(
    enumerate_cases(questionnaire), mean_weights(default_weight_matrix())
)
gmm, _ = em_fit(table.normalized, 2)
kde = KernelDensityEstimate.from_data(table.normalized)
scores = elicit_probabilities(table, gmm, kde)

# the lowest band: cases whose mixture-CDF score falls in [0, 0.1)
ctx = build_band_context(scores, (0.0, 0.1), approach=1)
print(f"band [0, 0.1): {ctx.n_objects} cases, {ctx.n_attributes} answers")

# derivation in both directions: the attributes shared by a case set, and
# the cases sharing an attribute set (a Galois connection)
no_outdoor = derive(ctx, "attributes", ("a_2_q6",))
both = derive(ctx, "attributes", ("a_2_q4", "a_2_q6"))
print(f"cases without outdoor activity: {len(no_outdoor)}")
print(f"... that also saw no tick bite: {len(both)}")
print(f"support a_2_q6: {ctx.support(('a_2_q6',))}")

# every concept is a maximal rectangle of the incidence: a case set and
# the exact attribute set those cases share
concepts = enumerate_concepts(ctx)
lattice = build_lattice(ctx, concepts)
print(f"concepts: {len(concepts)}, covering edges: {len(lattice.edges)}")
widest = max(concepts, key=lambda c: len(c.extent) * len(c.intent))
print(
    f"largest rectangle: {len(widest.extent)} cases x "
    f"{len(widest.intent)} answers {widest.intent_names(ctx)}"
)

# three artifacts per band: a Burmeister context for FCA tools, a DOT
# lattice diagram, and the single/pair support counts
out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
export_cxt(ctx, out / "band_0_0.1.cxt")
export_dot(lattice, out / "lattice_0_0.1.dot")
export_supports_csv(ctx, out / "supports_0_0.1.csv")
for name in ("band_0_0.1.cxt", "lattice_0_0.1.dot", "supports_0_0.1.csv"):
    print(f"wrote {out / name}")
