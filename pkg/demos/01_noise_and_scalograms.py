"""Walk one spectrum through every noise scenario and look at its scalograms.

Usage: python3 demos/01_noise_and_scalograms.py [out_dir]

Writes one PNG per (scenario, SNR) pair and prints the measured SNR of each
noisy copy next to the smallest-scale energy of its transform. The point
to notice: as the SNR falls, the fine-scale rows of the scalogram light up.
"""

import sys
from pathlib import Path

import numpy as np

from ramanwt import NoiseConfig, cwt, default_scales, inject, render
from ramanwt.cwt import save_png
from ramanwt.demo import demo_spectrum
from ramanwt.noise import prepare_clean

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/01")
out.mkdir(parents=True, exist_ok=True)

# A bundled Forsterite-like profile, put on the 1024-point analysis grid.
clean = prepare_clean(demo_spectrum("Forsterite"), 1024)
scales = default_scales(len(clean))
print(f"clean spectrum: {len(clean)} points, {clean.wavenumbers[0]:.0f}-{clean.wavenumbers[-1]:.0f} cm^-1")
print(f"{scales.size} Morlet scales from {scales[0]:.1f} to {scales[-1]:.1f} samples\n")

save_png(render(cwt(clean, scales), 128), out / "clean.png")

# With centre frequency 1 the wavelet at a = 1 oscillates once per sample, so
# sampled on integers it degenerates to a smoothing window and also sees the
# baseline. At a = 2 it alternates sign every sample: a pure noise detector.
i2 = int(np.argmin(np.abs(scales - 2.0)))
print(f"{'scenario':8} {'target':>7} {'measured':>9} {'|W(a=1)|':>9} {f'|W(a={scales[i2]:.2f})|':>12}")
for scenario in ("GN", "BB", "GB"):
    for snr in (30, 15, 5):
        if scenario == "BB" and snr != 30:
            continue  # baseline-only noise has no SNR knob
        sample = inject(clean, NoiseConfig(scenario, snr, seed=42))
        sc = cwt(sample.noisy, scales)
        fine = float(np.mean(np.abs(sc.coefficients[0])))
        nyq = float(np.mean(np.abs(sc.coefficients[i2])))
        measured = "-" if sample.measured_snr_db is None else f"{sample.measured_snr_db:.2f}"
        target = "-" if scenario == "BB" else f"{snr}"
        print(f"{scenario:8} {target:>7} {measured:>9} {fine:9.4f} {nyq:12.4f}")
        save_png(render(sc, 128), out / f"{scenario.lower()}_{snr}db.png")

print(f"\nimages in {out}/")
