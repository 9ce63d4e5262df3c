#!/usr/bin/env python3
"""Generate a seeded synthetic Arabic benchmark corpus as JSONL."""

import argparse
import json

from artok.synth import build_corpus


def main():
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument("output", help="output JSONL path")
    parser.add_argument("--target-mb", type=float, default=22.0,
                        help="target size of keepable text in megabytes")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--stems", type=int, default=26000,
                        help="distinct stem lexicon size")
    args = parser.parse_args()
    stats = build_corpus(
        args.output,
        target_bytes=int(args.target_mb * 1_000_000),
        seed=args.seed,
        n_stems=args.stems,
    )
    print(json.dumps({"output": args.output, **stats}))


if __name__ == "__main__":
    main()
