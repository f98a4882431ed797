#!/usr/bin/env python3
"""Regenerate the reference contest tree under fixtures/."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from optjudge.fixtures import generate_fixture_contest


def main():
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "fixtures"
    for pdir in generate_fixture_contest(dest):
        n_tests = len(list((pdir / "tests").glob("*.in")))
        print(f"{pdir}  ({n_tests} tests)")


if __name__ == "__main__":
    main()
