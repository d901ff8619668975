"""Run the full pipeline on the bundled toy corpus and print the report.

    python3 scripts/run_toy_pipeline.py [--out runs/toy]
"""

import argparse
import sys
from importlib import resources

from entitymetrics.cli import main

TOY = resources.files("entitymetrics") / "data" / "toy"


def run(out: str) -> int:
    code = main([
        "pipeline",
        "--corpus", str(TOY / "corpus.jsonl"),
        "--dictionary", str(TOY / "dictionary.txt"),
        "--query-file", str(TOY / "query.txt"),
        "--curated-db", str(TOY / "curated.tsv"),
        "--anchor", "DRUG:DB00331",
        "--out", out,
        "--graphml",
    ])
    if code == 0:
        code = main(["report", "--out", out])
    return code


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/toy")
    sys.exit(run(ap.parse_args().out))
