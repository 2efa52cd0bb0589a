"""Rewrite the pinned CSVs. Run only after verifying a change is intended:

    python3 tests/golden/regenerate.py
"""
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from golden_cases import CASES  # noqa: E402
from stokes_qsl import harness  # noqa: E402

for name, (command, settings) in CASES.items():
    cfg = harness.RunConfig(command=command, out=str(HERE / name), **settings)
    for path in harness.run_command(cfg):
        target = HERE / f"{name}.csv"
        path.replace(target)
        path.parent.rmdir()
        print(target)
