"""Regenerate the golden JSON schema files under tests/golden/.

The golden files pin the structural schema (keys and value types) of every
CLI report so accidental interface drift fails the acceptance suite.  Run
from the repo root after an intentional report change:

    python3 tools/make_golden.py
"""

from __future__ import annotations

import json
import os
import sys
import tempfile

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO, "tests"))

from helpers import golden_cli_runs, json_skeleton, run_cli_json  # noqa: E402


def main() -> int:
    out_dir = os.path.join(REPO, "tests", "golden")
    os.makedirs(out_dir, exist_ok=True)
    with tempfile.TemporaryDirectory() as work:
        for name, argv in golden_cli_runs(work):
            doc = run_cli_json(argv)
            skeleton = json_skeleton(doc)
            path = os.path.join(out_dir, f"{name}.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(skeleton, fh, indent=2, sort_keys=True)
                fh.write("\n")
            print(f"wrote {os.path.relpath(path, REPO)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
