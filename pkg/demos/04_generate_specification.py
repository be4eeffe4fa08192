"""Serialize enriched tuples, run the mock generator and clean the output.

Run with: python3 demos/04_generate_specification.py
"""

from patentforge import (
    all_components,
    all_features,
    build_tuple,
    clean_specification,
    generate_project,
    ingest_drawing_text,
    MockBackend,
    parse_claims,
    render_specification,
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
figures[0].brief_description = "a block diagram of the capture system"

features = all_features(claims)
components = all_components(figures)
mappings = suggest_mappings(features, components)
components_by_ref = {c.ref: c for c in components}

# One serialized tuple per feature: claim markup, then that feature's mapped
# components grouped by figure, then the involved brief descriptions.
tuples = []
for feature in features:
    mapped = [
        components_by_ref[e.component_ref]
        for e in mappings.entries_for(feature.feature_id)
    ]
    tuples.append(build_tuple(feature, mapped, figures))

print("wire payload for feature 1.1:")
print(" ", tuples[1].serialized)

# The mock backend is deterministic and offline; swap in RemoteBackend to
# call a hosted model with the same tuples.
results, timing = generate_project(tuples, MockBackend())
print()
print(f"{timing.count} ok result(s), wall time {timing.total_seconds:.3f}s")

# Cleaning strips the markup back out: <com>/<num> groups become
# "name number" text and <fig n> becomes "FIG. n".
cleaned = [clean_specification(r.raw_output, r.feature_id) for r in results]
print()
print(render_specification(cleaned, numbered=True))
