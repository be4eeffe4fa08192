"""Score feature/component pairs and build the mapping between them.

Run with: python3 demos/03_suggest_mappings.py
"""

from patentforge import (
    all_components,
    all_features,
    confirm_mapping,
    ingest_drawing_text,
    load_gold,
    parse_claims,
    precision_at_k,
    score_pair,
    suggest_mappings,
)

claims = parse_claims(
    """1. A data capture system comprising:
a processor executing capture logic;
a memory holding captured frames.
2. The system of claim 1, wherein a network interface streams the frames.
"""
)
figures = ingest_drawing_text(
    [("sheet-1", "FIG. 1\nprocessor 102\nmemory 104\nnetwork interface 106")]
)
features = all_features(claims)
components = all_components(figures)

# A single pair can be scored directly. The combined score averages
# term-frequency cosine with unigram and bigram precision.
score = score_pair(features[1].text, components[1])
print(f"feature 1.1 vs memory/104:")
print(f"  cosine={score.cosine:.4f} bleu1={score.bleu1:.4f} "
      f"bleu2={score.bleu2:.4f} combined={score.combined:.4f}")

# Suggestions keep components scoring at or above 0.1, at most 5 per feature.
mappings = suggest_mappings(features, components)
print()
for feature in features:
    entries = mappings.entries_for(feature.feature_id)
    label = f"{feature.feature_id[0]}.{feature.feature_id[1]}"
    print(f"{label}: {feature.text}")
    for entry in entries:
        figure, number = entry.component_ref
        print(f"  -> {figure}:{number}  combined={entry.score.combined:.3f} "
              f"({entry.origin})")

# A reviewer can confirm any pair, even one below the threshold; the entry
# becomes a user entry and survives future suggestion refreshes.
confirm_mapping(mappings, (1, 0), (1, "104"), features, components)
entry = mappings.find((1, 0), (1, "104"))
print()
print(f"after confirmation, 1.0 -> 1:104 origin={entry.origin}")

# Against a tiny gold standard, precision@k grades the suggestion quality.
gold = load_gold({"1.0": ["1:102"], "1.1": ["1:104"], "2.0": ["1:106"]})
print(f"precision@5 = {precision_at_k(mappings, gold, 5):.4f}")
