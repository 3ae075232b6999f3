#!/usr/bin/env python3
"""End-to-end walkthrough over the bundled demo webapp: static analysis,
training, profile build, and an enforcement decision for one benign query
and one tautology exploit."""

import argparse
from pathlib import Path

from sqlgate.enforcer import decide
from sqlgate.phpdal.analyzer import analyze_corpus, serialize_dal
from sqlgate.profiler import build_profile, record_training, serialize_profile

DEMO_APP = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "webapp_demo"

TAGGED = (
    "SELECT * FROM public_info where id > 0 "
    "# mysqli::multi_query@DatabaseConnectionmysqli::multi_execute@executeQuery@get_public_info"
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--app", default=str(DEMO_APP), help="PHP tree to analyze")
    args = parser.parse_args()

    dal = analyze_corpus(args.app, seeds=("mysqli",))
    print("== resolved database access layer ==")
    print(serialize_dal(dal))

    rec = record_training(TAGGED)
    print("== training record ==")
    print(rec.lines())

    profile = build_profile([rec], dal)
    print("== profile ==")
    print(serialize_profile(profile))

    print("== decisions ==")
    print(f"benign:  {decide(TAGGED, profile, dal).line()}")
    exploit = TAGGED.replace("id > 0", "id > 0 OR 1 = 1")
    print(f"exploit: {decide(exploit, profile, dal).line()}")


if __name__ == "__main__":
    main()
