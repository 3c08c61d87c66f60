"""
How many users should the secondary network serve?
==================================================

Serving more users adds multiplexing gain but shrinks the null space
each beam must live in, so the mean sum rate peaks at an interior user
count.  This script sweeps the argmax over antennas and SNR, fits the
per-SNR straight lines, then compresses the whole surface into the
closed-form power-law predictor and checks it against the search.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from crbeam import fit_user_count_surface, optimal_user_count, user_count_formula

ANTENNAS = (4, 6, 8, 10, 12, 14, 16)
SNRS_DB = (0.0, 8.0, 15.0, 16.0, 24.0)
TRIALS = 200
SEED = 7

points = []
for snr in SNRS_DB:
    for n in ANTENNAS:
        points.append(optimal_user_count(n_bs=n, snr_db=snr, n_pu=1,
                                         trials=TRIALS, seed=SEED))

surrogate = fit_user_count_surface(points, apply_tan=False)
print("per-SNR straight lines (slope, intercept, rmse):")
for lf in surrogate.linear_fits:
    print(f"  {lf.snr_db:5.1f} dB: {lf.slope:+.4f} * n_bs {lf.intercept:+.4f}   rmse={lf.rmse:.3f}")
print("power laws over linear SNR gamma:")
for pl in (surrogate.slope_fit, surrogate.intercept_fit):
    print(f"  {pl.target}: {pl.a:+.4f} * gamma^{pl.b:+.4f} {pl.c:+.4f}   rmse={pl.rmse:.4f}")

plt.figure(figsize=(7, 5))
for snr in SNRS_DB:
    ks = [p.k_best for p in points if p.snr_db == snr]
    plt.plot(ANTENNAS, ks, "o", label=f"searched, {snr:g} dB")
    pred = [user_count_formula(surrogate.formula, snr, n) for n in ANTENNAS]
    plt.plot(ANTENNAS, pred, "--")
plt.xlabel("base-station antennas")
plt.ylabel("rate-maximizing user count")
plt.title("searched argmax (dots) vs closed-form predictor (dashes)")
plt.grid(True, linestyle="--", linewidth=0.6)
plt.legend(fontsize=8)
plt.tight_layout()
plt.savefig("optimal_user_count.png", dpi=130)
print("wrote optimal_user_count.png")
