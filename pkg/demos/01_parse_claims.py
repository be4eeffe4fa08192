"""Parse a claim set into numbered claims, dependencies and features.

Run with: python3 demos/01_parse_claims.py
"""

from patentforge import all_features, parse_claims

CLAIMS = """1. A data capture system comprising:
a processor executing capture logic;
a memory holding captured frames; and
a network interface streaming the frames.
2. The system of claim 1, wherein the memory deduplicates the frames.
3. The system of claim 2, wherein the network interface batches transmissions.
"""

claims = parse_claims(CLAIMS)

# Each claim knows its kind and what it depends on.
for claim in claims:
    dep = f" -> claim {claim.depends_on}" if claim.depends_on else ""
    print(f"claim {claim.number} [{claim.kind}]{dep}")
    print(f"  preamble: {claim.preamble!r}")
    for feature in claim.features:
        print(f"  feature {feature.index}: {feature.text}")

# Features are addressed as (claim_number, index) pairs across the pipeline.
print()
print("all features in document order:")
for feature in all_features(claims):
    print(f"  {feature.claim_number}.{feature.index}")

# The parser also pre-computes the markup the generation model consumes.
print()
print("enriched form of feature 1.0:")
print(" ", claims[0].features[0].enriched_text)
