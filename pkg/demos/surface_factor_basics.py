"""Volume and surface parts of the pair amplitude in a thin LiNbO3 film.

Prints the surface factor V for signal and idler across the spectrum, the
(1+Vs)(1+Vi) enhancement of the joint density, and how the amplitude shrinks
as the film gets thinner.

    python3 demos/surface_factor_basics.py
"""

import numpy as np

from pairgen.amplitudes import PumpSpectrum, joint_density
from pairgen.constants import CONSTANTS
from pairgen.dispersion import load_media
from pairgen.spectra import FrequencyGrid
from pairgen.structures import BulkCrystalSpec, bulk_kernel

media = load_media()
ln = media["LiNbO3_e"]
pump = PumpSpectrum.cw(532e-9)
grid = FrequencyGrid.cw_line_wavelength(532e-9, 950e-9, 1250e-9, 16)

sig, idl = bulk_kernel(BulkCrystalSpec(ln, 10e-6), pump, grid)
lam = 2 * np.pi * CONSTANTS.c / grid.omega_s
v_s = (sig.surface / sig.volume).real
v_i = (idl.surface / idl.volume).real
gain = joint_density(sig.total, idl.total) / joint_density(sig.volume, idl.volume)

print("10 um film, 532 nm pump")
print(f"{'lambda_s [nm]':>14} {'V_s':>9} {'V_i':>9} {'n_tot/n_vol':>12}")
for row in list(zip(lam * 1e9, v_s, v_i, gain))[::3]:
    print("{:14.1f} {:9.4f} {:9.4f} {:12.4f}".format(*row))

# the whole amplitude, surface part included, scales with thickness
deg = FrequencyGrid.cw_line(pump.center_omega, *[pump.center_omega / 2] * 2, 16)
print("\nthickness   |F_total| at degeneracy (arb.)")
for length in (1e-3, 1e-6, 1e-9, 1e-12):
    s, _ = bulk_kernel(BulkCrystalSpec(ln, length), pump, deg)
    print(f"{length:9.0e}   {abs(s.total[0]):.3e}")
