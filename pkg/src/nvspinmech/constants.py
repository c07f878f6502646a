"""Physical constants and default model parameters (SI units).

Conventions used throughout the package:

* Oscillation frequencies (zero-field splitting, Zeeman shifts, dephasing
  linewidths) are stored as angular frequencies in rad/s.  Incoherent
  population rates (longitudinal relaxation, optical pumping) are plain
  rates in 1/s; they enter the master equation directly as decay
  coefficients, so no 2*pi factor applies to them.
* Magnetic fields in tesla, energies in joules, torques in N*m.
* Densities are number densities in 1/m^3 and refer to a single NV
  orientation class unless stated otherwise.
"""

import numpy as np

HBAR = 1.054571817e-34  # J s
MU0 = 4.0e-7 * np.pi  # T m / A
KB = 1.380649e-23  # J / K

# Carbon site density of diamond; 1 ppm of NV centers corresponds to
# 1.76e23 defects per m^3.
DIAMOND_CARBON_DENSITY = 1.76e29  # 1/m^3
PPM_DENSITY = DIAMOND_CARBON_DENSITY * 1e-6  # 1/m^3 per ppm

# NV ground-state constants.
ZERO_FIELD_SPLITTING = 2.0 * np.pi * 2.87e9  # rad/s
GYROMAGNETIC_RATIO = 2.0 * np.pi * 28.024e9  # rad/(s T), positive convention

# Level crossing of |0> and |-1> for an axial field.
GSLAC_FIELD = ZERO_FIELD_SPLITTING / GYROMAGNETIC_RATIO  # ~102.4 mT
