"""A full production day, twice: the report is a pure function of the seed.

Runs the discrete-event simulator at the documented load (100 orders/day),
prints the rendered summary, and shows byte-level reproducibility.  The same
run is available from the command line:

    simulate --seed 42 --days 1 --rate 100 --report-out /tmp/report
"""

import time

from orbitflow.sim import SimConfig, run_simulation

cfg = SimConfig(
    seed=42,
    order_rate=100,
    duration_days=1,
    qc_reject_probability=0.08,
)

started = time.monotonic()
report = run_simulation(cfg)
wall = time.monotonic() - started

print(report.summary())
print(f"conservation holds: {report.conserved()}")
print(f"simulated a full day of production in {wall:.2f}s wall time")

again = run_simulation(cfg)
print("second run byte-identical:", report.to_bytes() == again.to_bytes())

trace_tail = [row for row in report.queue_trace if row[2] > 0][-5:]
print("\nlast busy queue-depth samples (time, center, depth):")
for t, center, depth in trace_tail:
    print(f"  t={t:8.0f}  {center:<7} {depth}")
