"""
Why the sum-rate objective needs more than gradient ascent
==========================================================

The sum rate as a function of the raw beamforming weights is not
concave: at generic operating points its Hessian carries eigenvalues of
both signs.  This script measures the spectrum by finite differences at
equal-power zero-forcing points and contrasts it with the lightweight
random-matrix census (negative diagonals, complex-normal off-diagonals)
that suggests the same conclusion without touching the objective.
"""

import numpy as np

from crbeam import (
    ScenarioConfig,
    generate_channels,
    indefiniteness_probe,
    sumrate_hessian,
    zf_equalpower,
)

cfg = ScenarioConfig(n_su=3, n_pu=1, n_bs=4, seed=3)
indefinite = 0
extremes = []
for trial in range(25):
    ch = generate_channels(cfg, trial)
    report = sumrate_hessian(ch, zf_equalpower(ch, 10.0), step=1e-4)
    indefinite += report.indefinite
    extremes.append((report.min_eig, report.max_eig))

print(f"finite-difference Hessians at {len(extremes)} equal-power points:")
for i, (lo, hi) in enumerate(extremes[:5]):
    print(f"  instance {i}: eigenvalues span [{lo:+.3f}, {hi:+.3f}]")
print(f"  ... {indefinite}/{len(extremes)} instances carry both signs "
      f"(mixed curvature = neither convex nor concave)")

frac = indefiniteness_probe(k_users=3, draws=500, seed=3)
print(f"random-matrix census: {frac:.0%} of 500 draws show mixed eigenvalue signs")

# a single user below unit effective gain is the exception: curvature
# one-sided, no obstruction to local ascent
solo = ScenarioConfig(n_su=1, n_pu=0, n_bs=2, seed=5, noise_power=1.0, i_p_db=None)
ch = generate_channels(solo, 0)
gain = float(np.sum(np.abs(ch.h) ** 2))
from crbeam import zf_waterfill

report = sumrate_hessian(ch, zf_waterfill(ch, 0.3 / gain), step=1e-4)
print(f"single user at low gain: min eig {report.min_eig:+.2e}, "
      f"indefinite={report.indefinite}")
