"""End-to-end acceptance checks, one numbered criterion per test.

Each test prints a PASS/FAIL line with the measured numbers; run with
``pytest tests/test_acceptance.py -v -s`` to see them stream.  The
criteria pin their tolerances explicitly.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from crbeam import (
    ScenarioConfig,
    UserCountFit,
    fit_user_count_surface,
    generate_channels,
    lagrangian,
    optimal_user_count,
    run_ber,
    sum_rate,
    sumrate_hessian,
    user_count_formula,
    waterfill,
    zf_equalpower,
    zf_waterfill,
    zf_directions,
)
from crbeam.cli import main

SEED = 20240811
GRID_SEED = 20240707
NBS_GRID = (4, 6, 8, 10, 12, 14, 16)
SNR_GRID = (0.0, 8.0, 15.0, 16.0, 24.0)
PUBLISHED_SLOPES = {0.0: 0.3071, 8.0: 0.5357, 15.0: 0.6712, 16.0: 0.6893, 24.0: 0.8143}


def report(number: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")


# ---------------------------------------------------------------- criterion 1


def test_criterion1_zf_nulling_exactness():
    rng = np.random.default_rng(SEED)
    p_bs = 10.0
    worst_pu = 0.0
    worst_cross = 0.0
    started = time.perf_counter()
    for _ in range(1000):
        n = int(rng.integers(2, 17))
        m = int(rng.integers(0, min(3, n)))
        k = int(rng.integers(1, n - m + 1))
        cfg = ScenarioConfig(n_su=k, n_pu=m, n_bs=n, seed=int(rng.integers(1 << 31)))
        ch = generate_channels(cfg, 0)
        prec = zf_waterfill(ch, p_bs)
        if m:
            worst_pu = max(worst_pu, float(np.max(np.sum(np.abs(ch.g @ prec.weights) ** 2, axis=1))))
        cross = np.abs(ch.h @ prec.weights) ** 2
        np.fill_diagonal(cross, 0.0)
        if k > 1:
            worst_cross = max(worst_cross, float(np.max(cross)))
    elapsed = time.perf_counter() - started
    bound = 1e-18 * p_bs
    ok = worst_pu <= bound and worst_cross <= bound and elapsed < 10.0
    report(1, ok, f"max primary leak {worst_pu:.2e}, max cross-user leak {worst_cross:.2e} "
                  f"(bound {bound:.0e}), {elapsed:.1f}s over 1000 instances")
    assert worst_pu <= bound
    assert worst_cross <= bound
    assert elapsed < 10.0


# ---------------------------------------------------------------- criterion 2


def _grid_search_objective(b: np.ndarray, p_bs: float, steps: int = 1000) -> float:
    """Independent allocation oracle on the power-weighted simplex grid.

    Full enumeration up to K = 3; marginal-gain chunk allocation above
    (optimal on the grid for a separable concave objective).
    """
    k = b.size
    delta = p_bs / steps
    if k == 1:
        return float(np.log2(1.0 + p_bs / b[0]))
    if k == 2:
        s1 = np.arange(steps + 1) * delta
        shares = np.column_stack([s1, p_bs - s1])
        return float(np.max(np.sum(np.log2(1.0 + shares / b), axis=1)))
    if k == 3:
        i1, i2 = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
        mask = (i1 + i2) <= steps
        shares = np.column_stack([
            i1[mask] * delta,
            i2[mask] * delta,
            p_bs - (i1[mask] + i2[mask]) * delta,
        ])
        return float(np.max(np.sum(np.log2(1.0 + shares / b), axis=1)))
    shares = np.zeros(k)
    for _ in range(steps):
        gains = np.log2(1.0 + (shares + delta) / b) - np.log2(1.0 + shares / b)
        shares[int(np.argmax(gains))] += delta
    return float(np.sum(np.log2(1.0 + shares / b)))


def test_criterion2_waterfilling_oracle_equivalence():
    rng = np.random.default_rng(SEED + 1)
    started = time.perf_counter()
    worst_gap = 0.0
    for _ in range(200):
        k = int(rng.integers(1, 6))
        b = rng.uniform(0.1, 5.0, k)
        p_bs = float(rng.uniform(0.2, 30.0))
        res = waterfill(b, p_bs)
        exact = float(np.sum(np.log2(1.0 + res.powers)))
        grid = _grid_search_objective(b, p_bs)
        assert exact >= grid - 1e-12  # the exact solve can never lose to the grid
        worst_gap = max(worst_gap, exact - grid)
        active = res.powers > 0
        assert np.allclose(b[active] * (1.0 + res.powers[active]), res.mu, rtol=1e-12)
        assert np.all(res.powers[~active] == 0.0)
        assert np.all(b[~active] >= res.mu - 1e-12 * res.mu)
    elapsed = time.perf_counter() - started
    ok = worst_gap <= 1e-4 and elapsed < 60.0
    report(2, ok, f"worst objective gap to the simplex grid {worst_gap:.2e} bits/s/Hz "
                  f"(bound 1e-4), KKT exact, {elapsed:.1f}s over 200 vectors")
    assert worst_gap <= 1e-4
    assert elapsed < 60.0


# ---------------------------------------------------------------- criterion 3


def test_criterion3_per_trial_dominance():
    scenarios = [(k, n, m)
                 for k in (3, 5, 10, 15) for n in (8, 16) for m in (1, 2)
                 if k <= n - m]
    assert len(scenarios) == 11
    trials = 2000
    violations = 0
    min_gap_ratio = math.inf
    for k, n, m in scenarios:
        cfg = ScenarioConfig(n_su=k, n_pu=m, n_bs=n, seed=SEED, trials=trials)
        for snr in (0.0, 20.0):
            p = cfg.p_bs_for(snr)
            gaps = np.empty(trials)
            for t in range(trials):
                ch = generate_channels(cfg, t)
                t_dir = zf_directions(ch)
                b = np.sum(np.abs(t_dir) ** 2, axis=0)
                noise = ch.effective_noise
                wf_rate = np.sum(np.log2(1.0 + waterfill(b, p).powers / noise))
                ep_rate = np.sum(np.log2(1.0 + (p / b.sum()) / noise))
                gaps[t] = wf_rate - ep_rate
            violations += int(np.sum(gaps < 0))
            if snr == 20.0:
                se = gaps.std(ddof=1) / np.sqrt(trials)
                min_gap_ratio = min(min_gap_ratio, gaps.mean() / se)
    ok = violations == 0 and min_gap_ratio >= 5.0
    report(3, ok, f"{violations} dominance violations over {len(scenarios)}x2x{trials} trials; "
                  f"smallest 20 dB mean-gap/SE ratio {min_gap_ratio:.1f} (bound 5)")
    assert violations == 0
    assert min_gap_ratio >= 5.0


# ------------------------------------------------------- criteria 4 and 5


@pytest.fixture(scope="module")
def argmax_grid():
    points = {}
    for snr in SNR_GRID:
        for n in NBS_GRID:
            points[(snr, n)] = optimal_user_count(
                n_bs=n, snr_db=snr, n_pu=1, trials=400, seed=GRID_SEED
            )
    return points


def test_criterion4_linear_user_count_law(argmax_grid):
    from crbeam import linear_fit

    fits = {}
    for snr in SNR_GRID:
        pts = [(n, argmax_grid[(snr, n)].k_best) for n in NBS_GRID]
        fits[snr] = linear_fit(pts, snr_db=snr)
    slope15 = fits[15.0].slope
    rmse15 = fits[15.0].rmse
    checks = [abs(slope15 - 0.6712) <= 0.10, rmse15 <= 0.6]
    for snr in (0.0, 8.0, 16.0, 24.0):
        checks.append(abs(fits[snr].slope - PUBLISHED_SLOPES[snr]) <= 0.10)
    ordered = [fits[s].slope for s in (0.0, 8.0, 16.0, 24.0)]
    checks.append(all(b > a for a, b in zip(ordered, ordered[1:])))
    detail = ", ".join(f"{s:g}dB {fits[s].slope:.3f}" for s in SNR_GRID)
    report(4, all(checks), f"slopes {detail} vs published, 15 dB rmse {rmse15:.2f} (bound 0.6)")
    assert abs(slope15 - 0.6712) <= 0.10
    assert rmse15 <= 0.6
    for snr in (0.0, 8.0, 16.0, 24.0):
        assert abs(fits[snr].slope - PUBLISHED_SLOPES[snr]) <= 0.10
    assert all(b > a for a, b in zip(ordered, ordered[1:]))


def test_criterion5_surrogate_consistency(argmax_grid):
    surrogate = fit_user_count_surface(argmax_grid.values(), apply_tan=False)
    hits = 0
    total = 0
    for (snr, n), point in argmax_grid.items():
        predicted = user_count_formula(surrogate.formula, snr, n)
        rounded = int(np.clip(round(predicted), 1, n - 1))
        total += 1
        hits += abs(rounded - point.k_best) <= 1
    frac = hits / total

    paper_fit = UserCountFit(a1=-0.5189, b1=-0.2608, c1=0.8107,
                             a2=-3.2938, b2=0.0360, c2=3.8715, apply_tan=True)
    worked = user_count_formula(paper_fit, 10.0 * math.log10(15.0), 16)
    ok = frac >= 0.80 and abs(worked - 10.16) <= 0.01
    report(5, ok, f"rounded prediction within 1 user on {hits}/{total} grid cells "
                  f"({frac:.0%}, bound 80%); published-coefficient evaluation {worked:.4f} "
                  f"(bound 10.16 +- 0.01)")
    assert frac >= 0.80
    assert abs(worked - 10.16) <= 0.01


# ---------------------------------------------------------------- criterion 6


def _rayleigh_qam_oracle(p_bs: float) -> float:
    val, _ = integrate.quad(lambda g: norm.sf(np.sqrt(p_bs * g)) * np.exp(-g), 0.0, np.inf)
    return val


def test_criterion6_single_user_matches_analytic_oracle():
    worst_rel = 0.0
    details = []
    for snr, trials in [(5.0, 1200), (10.0, 4000), (15.0, 15000), (20.0, 70000)]:
        cfg = ScenarioConfig(n_su=1, n_pu=0, n_bs=1, snr_grid_db=(snr,), trials=trials,
                             seed=SEED, noise_power=1.0, i_p_db=None,
                             target_bit_errors=10**9, ber_symbols=100)
        curve = run_ber(cfg, "ZFWF")
        oracle = _rayleigh_qam_oracle(cfg.p_bs_for(snr))
        rel = abs(curve.ber[0] / oracle - 1.0)
        worst_rel = max(worst_rel, rel)
        details.append(f"{snr:g}dB {rel:+.1%}")
    ok = worst_rel <= 0.10
    report(6, ok, f"single-user BER vs quadrature oracle: {', '.join(details)} (bound 10%)")
    assert worst_rel <= 0.10


def _ber_point(k: int, m: int, snr: float, trials: int) -> float:
    cfg = ScenarioConfig(n_su=k, n_pu=m, n_bs=16, snr_grid_db=(snr,), trials=trials,
                         seed=SEED, target_bit_errors=10**9, ber_symbols=60)
    return float(run_ber(cfg, "ZFWF").ber[0])


def test_criterion6_single_primary_curve_keeps_falling():
    trials = 12000
    b30 = _ber_point(14, 1, 30.0, trials)
    b35 = _ber_point(14, 1, 35.0, trials)
    ratio = b30 / b35
    ok = ratio > 3.0
    report(6, ok, f"M=1 (K=14, 16 antennas) BER 30->35 dB drop factor {ratio:.2f} (bound > 3)")
    assert ratio > 3.0


def test_criterion6_two_primary_floor():
    # The flattest feasible two-primary configuration: every additional
    # primary shrinks the nulling space, and at K = n_bs - M the inverse
    # projected Gram has diversity-one tails.  The converged 30->35 dB
    # ratio of this system is ~3.0, not < 2 (see README): with the budget
    # swept and the primary interference constant, per-user SINR is
    # unbounded and no true floor exists at these operating points.
    trials = 12000
    b30 = _ber_point(14, 2, 30.0, trials)
    b35 = _ber_point(14, 2, 35.0, trials)
    ratio = b30 / b35
    ok = ratio < 2.0
    report(6, ok, f"M=2 (K=14, 16 antennas) BER 30->35 dB ratio {ratio:.2f} (bound < 2); "
                  f"ber30={b30:.3e} ber35={b35:.3e}")
    assert ratio < 2.0


# ---------------------------------------------------------------- criterion 7


def test_criterion7_nonconvexity_and_dual_identity():
    indefinite = 0
    for t in range(100):
        cfg = ScenarioConfig(n_su=3, n_pu=1, n_bs=4, seed=SEED)
        ch = generate_channels(cfg, t)
        rep = sumrate_hessian(ch, zf_equalpower(ch, 10.0), step=1e-4)
        indefinite += rep.indefinite

    worst_diff = 0.0
    for t in range(100):
        cfg = ScenarioConfig(n_su=3, n_pu=1, n_bs=8, seed=SEED + 2)
        ch = generate_channels(cfg, t)
        prec = zf_waterfill(ch, 10.0)
        diff = abs(lagrangian(ch, prec, np.zeros(3), np.zeros(1), 10.0) - sum_rate(ch, prec))
        worst_diff = max(worst_diff, diff)
    ok = indefinite >= 1 and worst_diff <= 1e-12
    report(7, ok, f"{indefinite}/100 equal-power points indefinite (need >= 1); "
                  f"zero-multiplier dual vs sum rate worst |diff| {worst_diff:.1e} (bound 1e-12)")
    assert indefinite >= 1
    assert worst_diff <= 1e-12


# ---------------------------------------------------------------- criterion 8


def test_criterion8_cli_byte_determinism(tmp_path):
    checks = []
    cases = [
        (["capacity", "--k", "3", "--m", "1", "--nbs", "8", "--snr", "0,10,20",
          "--trials", "50", "--seed", "31"], "capacity"),
        (["ber", "--k", "2", "--m", "1", "--nbs", "4", "--snr", "5,10",
          "--trials", "80", "--seed", "31", "--target-errors", "200"], "ber"),
        (["kstar", "--nbs", "4,6,8", "--snr", "8", "--m", "1",
          "--trials", "25", "--seed", "31"], "kstar"),
    ]
    for args, name in cases:
        seq = tmp_path / f"{name}_seq.csv"
        par = tmp_path / f"{name}_par.csv"
        rerun = tmp_path / f"{name}_rerun.csv"
        assert main(args + ["--workers", "1", "--out", str(seq)]) == 0
        assert main(args + ["--workers", "4", "--out", str(par)]) == 0
        assert main(args + ["--workers", "1", "--out", str(rerun)]) == 0
        same = seq.read_bytes() == par.read_bytes() == rerun.read_bytes()
        checks.append(same)
    ok = all(checks)
    report(8, ok, f"byte-identical CSVs under rerun and 4-way parallelism for "
                  f"{sum(checks)}/{len(checks)} commands")
    assert ok
