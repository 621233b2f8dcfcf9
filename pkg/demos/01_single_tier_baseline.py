"""
Single-tier Rayleigh baseline
=============================

With one tier, no shadowing, no noise, full reuse and alpha = 4 the coverage
has the elementary form 1 / (1 + sqrt(T) (pi/2 - arctan(1/sqrt(T)))).
This script checks the quadrature evaluation against it over a threshold
sweep and shows that the density drops out.
"""
import math

import numpy as np

from sfrcov import CoverageQuery, Mode, NetworkConfig, TierConfig, average_coverage, average_coverage_nonoise
from sfrcov.model import db_to_linear

# the elementary reference
def baseline(t):
    s = math.sqrt(t)
    return 1.0 / (1.0 + s * (math.pi / 2 - math.atan(1.0 / s)))


print(f"{'T (dB)':>7} {'quadrature':>11} {'closed form':>12} {'reference':>10}")
for t_db in np.arange(-10, 11, 2.5):
    t = db_to_linear(t_db)
    cfg = NetworkConfig((TierConfig(density=1.0, power=1.0, alpha=4.0, t_cover=t),))
    q = average_coverage(CoverageQuery(Mode.CEU), cfg)
    c = average_coverage_nonoise(CoverageQuery(Mode.CEU), cfg)
    print(f"{t_db:7.1f} {q:11.6f} {c:12.6f} {baseline(t):10.6f}")

# scaling the density leaves the interference-limited coverage unchanged
for lam in (0.01, 1.0, 100.0):
    cfg = NetworkConfig((TierConfig(density=lam, power=1.0, alpha=4.0),))
    print(f"lambda = {lam:6g}: coverage at 0 dB = {average_coverage_nonoise(CoverageQuery(), cfg):.12f}")
