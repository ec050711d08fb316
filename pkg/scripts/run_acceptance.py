"""Print one PASS/FAIL line per acceptance criterion (exit status 1 on any FAIL)."""

import pathlib
import runpy
import sys

if __name__ == "__main__":
    path = pathlib.Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.argv = [str(path)]
    runpy.run_path(str(path), run_name="__main__")
