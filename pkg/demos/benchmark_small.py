"""A miniature kernel comparison, start to finish.

Three replications of each kernel at a small budget: every replication
draws one embedding that all kernels share, so the comparison isolates
how each kernel copes with clamped geometry.  Three reps are far too few
to rank the kernels (gap spreads are wide); this script shows the
machinery.  Full-size settings live in the command-line tool
(rembo-bench), which keeps enough replications for the medians to mean
something.
"""

import json
import tempfile
from pathlib import Path

from rembo import BenchmarkConfig, run_benchmark

out = Path(tempfile.mkdtemp(prefix="rembo_demo_"))
config = BenchmarkConfig(
    D=25, d=6, budget=80, n_reps=3,
    kernels=("kY", "kX", "kPsi"),
    base_seed=0, out_dir=str(out), parallel=1,
)

print(f"running {config.n_reps} reps x {len(config.kernels)} kernels "
      f"at budget {config.budget} (a few minutes on one core)...")
summary = run_benchmark(config)

print()
print(f"{'kernel':>6} {'median':>8} {'mean':>8} {'min':>8} {'max':>8}")
for kernel, s in summary["stats"].items():
    print(f"{kernel:>6} {s['median']:8.3f} {s['mean']:8.3f} "
          f"{s['min']:8.3f} {s['max']:8.3f}")

print()
print(f"artifacts under {out}:")
for p in sorted(out.iterdir()):
    print(f"  {p.name}")

# the gap table is plain CSV; the summary reloads as JSON
reloaded = json.loads((out / "summary.json").read_text())
assert reloaded["stats"] == summary["stats"]
print("\nsummary.json round-trips the in-memory statistics exactly")
