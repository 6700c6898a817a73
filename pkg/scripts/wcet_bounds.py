"""Largest feasible WCET per actor of the modified Ingenuity spec, with the job that limits it."""

from rmdf.examples import EXAMPLES
from rmdf.report import exact_with_hint
from rmdf.timing import UNBOUNDED, TimingAnalysis

ta = TimingAnalysis(EXAMPLES["ingenuity_modified"]())
table = ta.window_table()
for actor, wins in table.windows.items():
    finite = [w for w in wins if w.length is not UNBOUNDED]
    if not finite:
        print(f"{actor:<20} unbounded")
        continue
    tight = min(finite, key=lambda w: w.length)
    print(f"{actor:<20} {exact_with_hint(tight.length):<18} limited by job {tight.job}")
