"""
Locating and tracing double criticality
=======================================

Newton on both conditions from the bundled shallow-water fixture, then
pseudo-arclength continuation.  The trace is written as CSV next to this
script; a coarse grid scan shows where the first condition changes sign.
"""
from pathlib import Path

import numpy as np

from modwave import criticality as crit
from modwave.fixtures import load_fixture

f = load_fixture("sw")
cp = crit.find_double_critical(f.model, f.fixed_state, f.guess, pin=f.pin)
print("root (r, k1, k2):", cp.params_slice)
print("zeta:", cp.zeta, " delta:", cp.delta)
print("residuals:", {k: f"{v:.1e}" for k, v in cp.residuals.items()})

trace = crit.trace_curve(f.model, f.fixed_state, cp, steps=100, max_step=0.02,
                         window=f.window_by_index())
out = Path(__file__).with_name("sw_trace.csv")
out.write_text(trace.to_csv())
print(f"{len(trace.points)} points ({trace.stop_reason}) -> {out.name}")

scan = crit.scan_surfaces(f.model, f.fixed_state, np.linspace(0.05, 0.95, 10),
                          np.linspace(0.1, 5, 20), np.linspace(0.1, 5, 20))
print("fraction of nodes with det D_k B < 0:", np.mean(scan["det"] < 0))
