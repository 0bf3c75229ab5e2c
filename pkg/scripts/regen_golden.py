"""Rewrite fixtures/worked/expected/*.json from the current CLI output.

Run from the repository root after an intended behaviour change, then
review the diff before committing.
"""

import json
import os
from pathlib import Path

from funcobs.cli import run

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "worked"


def main() -> None:
    os.chdir(FIXTURES)
    for case in json.loads(Path("manifest.json").read_text()):
        report = run(case["argv"])
        out = Path("expected") / f"{case['name']}.json"
        out.write_text(json.dumps(report, indent=2) + "\n")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
