#!/usr/bin/env python3
"""End-to-end grid experiment: build (or reuse) a benchmark corpus, then
train and evaluate all four tokenizer kinds at 16k/28k/44k and print the
ratio table."""

import argparse
import sys
from pathlib import Path

from artok.cli import main as artok_main
from artok.synth import build_corpus


def main():
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument("--work-dir", default="grid_run", help="output directory")
    parser.add_argument("--target-mb", type=float, default=22.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sizes", default="16000,28000,44000")
    parser.add_argument("--kinds", default="bpe,wordpiece,wordlevel,bpe_morph")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    work_dir = Path(args.work_dir)
    work_dir.mkdir(parents=True, exist_ok=True)
    corpus = work_dir / "corpus.jsonl"
    if not corpus.exists():
        print(f"building corpus {corpus} ...", file=sys.stderr)
        build_corpus(corpus, target_bytes=int(args.target_mb * 1_000_000), seed=args.seed)

    rc = artok_main([
        "compare",
        "--corpus", str(corpus),
        "--sizes", args.sizes,
        "--kinds", args.kinds,
        "--threads", str(args.threads),
        "--out-dir", str(work_dir),
    ])
    if rc == 0:
        print((work_dir / "report.csv").read_text(encoding="utf-8"), end="", file=sys.stderr)
    return rc


if __name__ == "__main__":
    sys.exit(main())
