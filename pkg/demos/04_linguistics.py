"""Grammatical similarity and linguistic features on question pairs.

Shows the tree/POS similarity decomposition for a structural rewrite versus
a near-identical rephrase, then summarizes a feature distribution with a
bootstrap CI and KDE curve.
"""

from sqlprobe.linguistics import (
    features,
    grammar_similarity,
    heuristic_annotate,
    subtree_count,
    summarize_distribution,
)

original = ("How many countries does each continent have? "
            "List the continent id, continent name, and the number of countries.")
flattened = "What is the distribution of countries across different continents?"
close = "How many countries does every continent have? List id, name, and count."

annotated_original = heuristic_annotate(original)
for label, other in (("flattened rewrite", flattened), ("close rephrase", close)):
    annotated_other = heuristic_annotate(other)
    sim = grammar_similarity(annotated_original, annotated_other)
    print(f"{label}:")
    print(f"  s_tree={sim.s_tree:.3f}  s_pos={sim.s_pos:.3f}  s_grammar={sim.s_grammar:.3f}")

print("\nper-question features:")
for text in (original, flattened, close):
    annotated = heuristic_annotate(text)
    f = features(annotated)
    print(f"  len={f.length:>2}  depth={f.syntactic_depth:>2}  "
          f"lexdiv={f.lexical_diversity:.2f}  subtrees={subtree_count(annotated)}  | {text[:48]}...")

lengths = [
    features(heuristic_annotate(text)).length
    for text in (
        original, flattened, close,
        "How many singers do we have?",
        "Show the names and locations of all stadiums.",
        "Which courses have at least two enrolled students?",
        "What is the average age of singers from France?",
    )
]
summary = summarize_distribution(lengths, seed=0)
print("\nquestion-length distribution:")
print(f"  mean={summary.mean:.2f} median={summary.median:.1f} "
      f"IQR=[{summary.q25:.1f}, {summary.q75:.1f}] CI95=[{summary.ci95_lo:.2f}, {summary.ci95_hi:.2f}]")
head = ", ".join(f"({x:.1f}, {d:.3f})" for x, d in summary.kde_curve[:4])
print(f"  kde curve starts: {head} ... ({len(summary.kde_curve)} points)")
