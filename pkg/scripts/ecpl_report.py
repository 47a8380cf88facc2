"""Print the three ECPL relation tables and the full two-engine analysis."""

import argparse
from pathlib import Path

from splcheck.model import load_model
from splcheck.report import TABLES, EngineOptions, analyze, relation_matrix, render_table

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default=str(ROOT / "fixtures" / "ecpl.spl"))
    ap.add_argument("--json", action="store_true", help="emit the flat JSON report")
    args = ap.parse_args()
    m = load_model(args.model)
    opts = EngineOptions()
    if not args.json:
        for which in TABLES:
            print(render_table(m, which, relation_matrix(m, which, "qbf", opts)))
    rep = analyze(m, opts, model_id=Path(args.model).name)
    print(rep.to_json() if args.json else rep.to_text(), end="")


if __name__ == "__main__":
    main()
