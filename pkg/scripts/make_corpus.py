#!/usr/bin/env python3
"""Generate the eight-category scenario corpus plus matching DAL, training
log, and profile files, ready for `sqlgate replay`."""

import argparse
from pathlib import Path

from sqlgate.corpus import generate_all, save_corpus, synthetic_dal, train_profile
from sqlgate.phpdal.analyzer import save_dal
from sqlgate.profiler import append_record, record_training, save_profile


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="corpus_out")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scenarios = generate_all()
    dal = synthetic_dal()

    save_corpus(scenarios, outdir / "corpus")
    save_dal(dal, outdir / "dal.txt")

    log_path = outdir / "train.log"
    log_path.write_text("")
    for scenario in scenarios:
        for query in scenario.benign:
            append_record(log_path, record_training(query))

    profile = train_profile(scenarios, dal)
    save_profile(profile, outdir / "profile.txt")
    print(f"wrote {len(scenarios)} scenarios under {outdir}/")
    print(f"replay with: sqlgate replay -p {outdir}/profile.txt -d {outdir}/dal.txt --corpus {outdir}/corpus")


if __name__ == "__main__":
    main()
