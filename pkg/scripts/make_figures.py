"""Regenerate every figure as CSV polylines plus SVG into one directory."""
from __future__ import annotations

import argparse
from pathlib import Path

from ecplab import figures


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--out", type=Path, default=Path("out/figures"))
    args = p.parse_args()
    for name in figures.FIGURES:
        for path in figures.build(name, h=args.h).write(args.out):
            print(path)


if __name__ == "__main__":
    main()
