#!/usr/bin/env python3
"""Scoring strategies: ERT, FCE, and comparison uncertainty.

A strategy is summarized over n seeded runs. When at least one run
reaches the target, the estimated running time (total evaluations over
successes) decides comparisons; otherwise the mean final error does.
The Welch tail probability quantifies how sure a comparison is.
"""

from modcmaes import compare, make_problem, run_batch, welch_uncertainty

problem = make_problem("schaffers", 2)

print("two structures on 2-D Schaffers, 16 runs each, budget 2000")
fast = run_batch("00000000001", problem, n=16, budget=2000, seed=0)
slow = run_batch("00010100000", problem, n=16, budget=2000, seed=0)
for s in (fast, slow):
    ert = "NA" if s.ert is None else f"{s.ert:.1f}"
    print(
        f"  {s.config}: ert {ert:>9s}  fce {s.fce:.3e}  "
        f"spread {s.std_error:.3e}"
    )

result = compare(fast, slow)
print(
    f"\nwinner: {result.winner} on {result.basis}, relative distance "
    f"{result.d:.3g}, P(indistinguishable) = {result.uncertainty:.2e}"
)

# How sure are we at a given distance and run count? The tail drops
# fast with n; tiny distances stay uncertain even with many runs.
print("\nuncertainty P(A = B) by relative distance and run count")
header = "  d \\ n   " + "".join(f"{n:>10d}" for n in (2, 8, 32, 128))
print(header)
for d in (0.1, 0.5, 1.0, 10.0):
    cells = "".join(
        f"{welch_uncertainty(d, 0.5, n):>10.2e}" for n in (2, 8, 32, 128)
    )
    print(f"  {d:<8.1f}{cells}")
