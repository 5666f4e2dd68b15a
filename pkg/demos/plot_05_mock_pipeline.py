"""
The whole pipeline against a mock endpoint
==========================================

``openqe run`` judges, filters and evaluates. A canned server stands in for
the model so this runs offline in a second.
"""

import json
import tempfile
from pathlib import Path

from openqe.cli import main
from openqe.mock_server import mock_serve

fixtures = Path(__file__).resolve().parent.parent / "fixtures" / "e2e"
out = Path(tempfile.mkdtemp())

###############################################################################
# The mock answers five segments with deliberately messy output: fences,
# Python literals, a hallucinated phrase, a truncated answer.

server = mock_serve(fixtures / "mock")
try:
    code = main(["run", "--segments", str(fixtures / "segments.jsonl"), "--gold", str(fixtures / "gold.jsonl"),
                 "--endpoint", server.url, "--model", "mock-qe", "--out", str(out)])
finally:
    server.stop()
print("exit code", code)

###############################################################################
# Every stage leaves a file behind.

for path in sorted(out.iterdir()):
    print(path.name)

###############################################################################
# The rendered report.

print((out / "report.md").read_text())

report = json.loads((out / "report.json").read_text())
print(report["language_pairs"]["cs-de"]["rejection"])
