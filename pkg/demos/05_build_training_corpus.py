"""Build a JSONL training corpus from bulk patent full-text files.

Run with: python3 demos/05_build_training_corpus.py
"""

import json
import tempfile
from pathlib import Path

from patentforge import build_corpus

GRANT = """<?xml version="1.0"?>
<us-patent-grant>
  <publication-reference><document-id><doc-number>9000001</doc-number></document-id></publication-reference>
  <invention-title>Flux measurement</invention-title>
  <classification-cpc-text>G06F 17/00</classification-cpc-text>
  <description>
    <heading>BRIEF DESCRIPTION OF THE DRAWINGS</heading>
    <p>FIG. 1 is a block diagram of the system.</p>
    <heading>DETAILED DESCRIPTION</heading>
    <p>A flux probe 104 is described with reference to FIG. 1.</p>
    <p>A readout bus 106 carries samples from the flux probe 104.</p>
  </description>
  <claims>
    <claim><claim-text>1. A system comprising: a flux probe; and a readout bus.</claim-text></claim>
  </claims>
</us-patent-grant>
"""

OFF_TOPIC = GRANT.replace("G06F 17/00", "A01B 1/00").replace("9000001", "9000002")

with tempfile.TemporaryDirectory() as workdir:
    source = Path(workdir) / "grants"
    source.mkdir()
    (source / "on_topic.xml").write_text(GRANT)
    (source / "off_topic.xml").write_text(OFF_TOPIC)
    out = Path(workdir) / "tuples.jsonl"

    # The default configuration keeps only G06F-classified documents,
    # suggests mappings at threshold 0.1 and truncates to 512 proxy tokens.
    stats = build_corpus(source, out)
    print(f"documents: {stats['documents_accepted']}/{stats['documents_seen']} accepted")
    for name, reason in stats["rejections"].items():
        print(f"  rejected {name}: {reason}")
    print(f"tuples emitted: {stats['tuples_emitted']} "
          f"(dropped {stats['features_dropped']} unsupported feature(s))")

    print()
    print("first tuple:")
    record = json.loads(out.read_text().splitlines()[0])
    print(f"  doc {record['doc_id']}, feature {record['feature_id']}")
    print(f"  input : {record['input_text']}")
    print(f"  target: {record['target_text']}")

    # Re-running produces byte-identical output, at any parallelism.
    again = Path(workdir) / "again.jsonl"
    build_corpus(source, again, parallelism=4)
    print()
    print(f"byte-identical re-run at parallelism 4: "
          f"{out.read_bytes() == again.read_bytes()}")
