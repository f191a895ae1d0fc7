"""
Emergent mKdV coefficients
==========================

Raw projections at a double-critical point, their normalized values, and
the Kuramoto cross-check of the cubic coefficient, for both models.
"""
from modwave import criticality as crit
from modwave import reduction
from modwave.fixtures import load_fixture

for name in ("sw", "cnls"):
    f = load_fixture(name)
    cp = crit.find_double_critical(f.model, f.fixed_state, f.guess, pin=f.pin)
    co = reduction.assemble(cp.model, cp)
    kc = reduction.kuramoto_cubic(cp.model, cp)
    print(f"[{name}] a0={co.a0:.8g} a1={co.a1:.8g} a2={co.a2:.8g}")
    print(f"       a1/a0^2={co.cubic_ratio:.8g} a2/a0={co.dispersive_ratio:.8g}")
    print(f"       Kuramoto/(2 a1_raw) - 1 = {kc / (2 * co.a1_raw) - 1:.1e}")

    # per-term comparison with the closed forms carried by the model
    report = reduction.closed_form_report(cp.model, cp)
    for term, row in report.items():
        if isinstance(row, dict):
            print(f"       {term:15s} rel diff {row['rel_diff']:.1e} {'ok' if row['agree'] else 'MISMATCH'}")
