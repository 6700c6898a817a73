"""Cross-check closed-form timing and routing-actor removal on random specs.

Uses the reference oracles from the test suite, so run it from the repository root.
"""

import argparse
import random
import sys
import time
import warnings
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from helpers import consumed_labels, provenance_windows, random_routed_spec, random_timed_spec  # noqa: E402
from rmdf.analysis import analyze_mode_spec  # noqa: E402
from rmdf.desugar import DesugarError, remove_routing_actors  # noqa: E402
from rmdf.execution import PreprocessError, preprocess  # noqa: E402
from rmdf.timing import TimingAnalysis, TimingError  # noqa: E402


def timing(seeds: int) -> tuple[int, int]:
    checked = bad = 0
    for seed in range(seeds):
        spec = random_timed_spec(random.Random(seed))
        r = analyze_mode_spec(spec)
        if not (r.consistent and r.live):
            continue
        try:
            spec, _ = preprocess(spec)
            ta = TimingAnalysis(spec)
            ta.window_table()
        except (PreprocessError, TimingError):
            continue
        q, jobs, rel, dl = provenance_windows(spec)
        ok = all(rel(a, n) == ta.release(a, n) for a, k in jobs.items() for n in range(1, k + 1))
        ok &= all(dl(a, n) == ta.deadline(a, n) for a in jobs for n in range(1, q[a] + 1))
        checked += 1
        bad += not ok
    return checked, bad


def desugar(seeds: int) -> tuple[int, int]:
    warnings.simplefilter("ignore")
    checked = bad = 0
    for seed in range(seeds):
        spec = random_routed_spec(random.Random(seed))
        try:
            out = remove_routing_actors(spec)
        except DesugarError:
            continue
        checked += 1
        bad += consumed_labels(spec)[0] != consumed_labels(out)[0]
    return checked, bad


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=400)
    args = ap.parse_args()
    for name, fn in (("timing", timing), ("desugar", desugar)):
        t0 = time.perf_counter()
        checked, bad = fn(args.seeds)
        print(f"{name}: {checked} usable specs out of {args.seeds} seeds, {bad} mismatches, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
