# Steering the crystal with the field direction.
#
# In the diamagnetic regime the locked NV axis follows the field: rotating
# the field direction by 14 degrees moves the axis by well under a degree
# for a strong ensemble, while a spin-free particle would follow the
# lab-fixed trap exactly (the control line).  Stronger optical pumping
# tightens the lock.

import numpy as np

from nvspinmech import (CrystalOrientation, SpinParams, TrapModel,
                        field_rotation_sweep)

DEG = np.pi / 180

orientation = CrystalOrientation.identity()
trap = TrapModel(trap_frequency=2 * np.pi * 300.0, theta0=3 * DEG)
sweep = np.linspace(0.0, 14 * DEG, 8)

print("field rotated at fixed |B| = 130 mT (trap: 300 Hz, 3 deg)")
print(f"{'theta_B (deg)':>14} {'locked (deg)':>13} {'control (deg)':>14}")
params = SpinParams(n_spins_per_class=1e9)
for pt in field_rotation_sweep(params, orientation, trap, 0.13, sweep):
    print(f"{pt.theta_b / DEG:14.1f} {pt.theta / DEG:13.3f} "
          f"{pt.theta_control / DEG:14.1f}")

print("\nresidual tilt at theta_B = 14 deg versus pumping rate:")
for pump in (1e5, 3e5, 1e6):
    p = SpinParams(n_spins_per_class=1e9, pump_rate=pump)
    pts = field_rotation_sweep(p, orientation, trap, 0.13,
                               np.array([0.0, 14 * DEG]))
    print(f"  pump {pump:8.0e} 1/s -> theta = {pts[-1].theta / DEG:.3f} deg")
