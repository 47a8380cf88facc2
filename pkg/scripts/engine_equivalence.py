"""Compare the semantic and QBF engines on seeded random canonical product lines."""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from helpers import random_model  # noqa: E402
from splcheck.report import (EngineOptions, analysis_queries, qbf_verdict,  # noqa: E402
                             relation_queries, semantic_verdict)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", "--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--components", type=int, default=6)
    ap.add_argument("--features", type=int, default=4)
    ap.add_argument("--entries", type=int, default=5)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    opts = EngineOptions()
    start = time.perf_counter()
    total = bad = 0
    for i in range(args.count):
        m = random_model(rng, args.components, args.features, args.entries)
        qs = analysis_queries(m) + relation_queries(m, "definition") + \
            [q for q in relation_queries(m, "lemma") if q.kind == "covers"]
        for q in qs:
            total += 1
            a, b = semantic_verdict(m, q), qbf_verdict(m, q, opts)
            if a != b:
                bad += 1
                print(f"model {i}: {q.label()}: semantic={a} qbf={b}")
    print(f"{args.count} models, {total} verdicts, {bad} disagreements, "
          f"{time.perf_counter() - start:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
