"""
Searching for the cell-edge occupancy configuration
===================================================

The reference cell-edge coverage at 0 dB is 0.4229 for occupancies
(0.1, 0.2) and 0.323 for (0.2, 0.6), a 23.6% drop. The reuse factor, the
edge power ratio and the SNR behind those numbers are not given, so we
search a grid of plausible values and rank configurations by the larger of
the two absolute deviations.

Writes ``docs/fig2_recovery.md``. The best row is shipped as
``configs/fig2-recovery.yaml``.
"""
import itertools
from pathlib import Path

from sfrcov import CoverageQuery, Mode, average_coverage, table1

TARGETS = (0.4229, 0.323)
LOW, HIGH = (0.1, 0.2), (0.2, 0.6)
DELTAS = (1, 2, 3, 4, 6)
PHIS = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0)
SNRS = (None,) + tuple(float(s) for s in range(-5, 21))

out = Path(__file__).resolve().parents[1] / "docs" / "fig2_recovery.md"


def ceu(delta, phi, snr, eps):
    return average_coverage(CoverageQuery(Mode.CEU), table1(delta=delta, phi=phi, epsilon=eps, snr_ref_db=snr))


rows = []
for delta, phi, snr in itertools.product(DELTAS, PHIS, SNRS):
    a, b = ceu(delta, phi, snr, LOW), ceu(delta, phi, snr, HIGH)
    rows.append((max(abs(a - TARGETS[0]), abs(b - TARGETS[1])), delta, phi, snr, a, b))
rows.sort(key=lambda r: r[0])


def snr_text(snr):
    return "none" if snr is None else f"{snr:g} dB"


lines = [
    "# Cell-edge occupancy target: recovery search",
    "",
    "Generated by `demos/fig2_recovery.py`.",
    "",
    "Target: CEU coverage at T = 0 dB of 0.4229 with occupancies (0.1, 0.2)",
    "and 0.323 with (0.2, 0.6), a relative drop of 23.6%. Fixed: the two-tier",
    "reference network (lambda = 0.25 / 0.5, P ratio 100, alpha = 3.5,",
    "8 dB shadowing), nearest-BS association.",
    "",
    f"Searched: delta in {list(DELTAS)}, phi in {[int(p) for p in PHIS]}, reference SNR",
    "in {none (interference limited), -5 dB ... 20 dB in 1 dB steps}",
    f"({len(rows)} configurations).",
    "",
    "## Best configurations",
    "",
    "| rank | delta | phi | SNR | CEU (0.1, 0.2) | CEU (0.2, 0.6) | max abs deviation | relative drop |",
    "|---:|---:|---:|---:|---:|---:|---:|---:|",
]
for k, (dev, delta, phi, snr, a, b) in enumerate(rows[:15], 1):
    lines.append(f"| {k} | {delta} | {phi:g} | {snr_text(snr)} | {a:.4f} | {b:.4f} | {dev:.4f} | {1 - b / a:.1%} |")

best_sfr = next(r for r in rows if r[1] >= 2 and r[2] > 1)
steepest = max(rows, key=lambda r: 1 - r[5] / r[4])
lines += [
    "",
    "## Outcome",
    "",
    f"The best configuration with a genuine reuse pattern (delta >= 2, phi > 1) is delta = {best_sfr[1]},",
    f"phi = {best_sfr[2]:g}, SNR = {snr_text(best_sfr[3])}: {best_sfr[4]:.4f} -> {best_sfr[5]:.4f},",
    f"within {best_sfr[0]:.4f} of both targets (tolerance 0.05). It ships as",
    "`configs/fig2-recovery.yaml`.",
    "",
    "Both absolute values are reproduced within tolerance, but the relative drop is not:",
    f"it is {1 - best_sfr[5] / best_sfr[4]:.1%} against 23.6%. The steepest drop in the grid is",
    f"{1 - steepest[5] / steepest[4]:.1%} (delta = {steepest[1]}, phi = {steepest[2]:g}, SNR = {snr_text(steepest[3])}),",
    f"but there coverage starts at {steepest[4]:.4f}. Noise is the only searched knob that",
    "lowers the level towards 0.42, and it also shrinks the share of the outage that",
    "occupancy controls, so level and drop cannot both be met on this grid. The target",
    "may rest on a different association rule or occupancy pairing; no further guess",
    "is made.",
    "",
    "## Monotone trend check (interference limited)",
    "",
    "| delta | phi | CEU (0.1, 0.2) | CEU (0.2, 0.6) | drop |",
    "|---:|---:|---:|---:|---:|",
]
for delta in (2, 3):
    for phi in (2.0, 4.0, 8.0):
        a, b = ceu(delta, phi, None, LOW), ceu(delta, phi, None, HIGH)
        lines.append(f"| {delta} | {phi:g} | {a:.4f} | {b:.4f} | {a - b:.4f} |")

out.parent.mkdir(exist_ok=True)
out.write_text("\n".join(lines) + "\n")
print("\n".join(lines))
