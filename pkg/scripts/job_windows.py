"""Print release, deadline and window of the first jobs of every actor in the modified Ingenuity spec."""

import argparse

from rmdf.examples import EXAMPLES
from rmdf.model import ActorKind
from rmdf.report import exact_with_hint
from rmdf.timing import TimingAnalysis


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jobs", type=int, default=3, help="jobs per actor, capped at its repetition count")
    args = ap.parse_args()
    spec = EXAMPLES["ingenuity_modified"]()
    ta = TimingAnalysis(spec)
    print(f"{'actor':<20}{'job':>4}  {'release':<22}{'deadline':<22}window")
    for actor, q in ta.q.items():
        if spec.actor(actor).kind is ActorKind.DUPLICATER:
            continue
        for n in range(1, min(args.jobs, q) + 1):
            w = ta.window(actor, n)
            print(f"{actor:<20}{n:>4}  {exact_with_hint(w.release):<22}{exact_with_hint(w.deadline):<22}{exact_with_hint(w.length)}")


if __name__ == "__main__":
    main()
