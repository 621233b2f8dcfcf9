"""
Trading cell-center for cell-edge coverage
==========================================

Raising the edge power ratio phi helps a cell-edge user, whose own BS
transmits louder, and hurts a cell-center user, who only sees the louder
edge subbands of its neighbours as interference.
"""
from sfrcov import CoverageQuery, Mode, average_coverage, table1

print(f"{'phi':>5} {'CEU':>8} {'CCU':>8} {'random':>8}")
for phi in (1, 2, 4, 6, 8, 10):
    cfg = table1(phi=float(phi))
    row = [average_coverage(CoverageQuery(m), cfg) for m in (Mode.CEU, Mode.CCU, Mode.USER)]
    print(f"{phi:5d} " + " ".join(f"{v:8.4f}" for v in row))

# Occupancy works the other way round: more busy RBs means more interferers.
print()
for eps in ((0.1, 0.2), (0.2, 0.6), (0.5, 1.0)):
    p = average_coverage(CoverageQuery(Mode.CEU), table1(epsilon=eps))
    print(f"epsilon = {eps}: CEU coverage {p:.4f}")
