"""Extract component name/numeral pairs from drawing-tool text exports.

Run with: python3 demos/02_extract_drawing_components.py
"""

from patentforge import enrich_components, ingest_drawing_text

# One exported text page per figure. Reference numerals need 2-4 digits
# (so claim numbers and "step 5" style labels are never mistaken for them).
PAGES = [
    (
        "sheet-1",
        """FIG. 1
        processor 102
        memory 104
        network interface 106
        step 5
        """,
    ),
    (
        "sheet-2",
        """FIG. 2
        the memory 104 connects to a backplane 210
        """,
    ),
]

figures = ingest_drawing_text(PAGES)

for figure in figures:
    print(f"figure {figure.figure_number} (from {figure.source_label}):")
    for pair in figure.components:
        print(f"  {pair.number}: {pair.name}")
    for note in figure.warnings:
        print(f"  note: {note}")

# Numeral 104 was already named on sheet-1, so sheet-2 keeps that name;
# "step 5" was ignored; stopwords like "the"/"a" bound each name.

print()
print("component markup for figure 1:")
print(" ", enrich_components(figures[0]))
