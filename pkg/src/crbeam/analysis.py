"""Curvature probes of the sum-rate objective and the constrained dual.

The sum rate is treated as a real function of the stacked real and
imaginary parts of all beamforming weights (2 * n_bs * K coordinates),
which sidesteps complex-derivative conventions entirely.  The Hessian
is estimated with nested central differences and symmetrized; mixed
eigenvalue signs certify non-concavity of the objective at that point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .model import ChannelSet, Precoder, sum_rate

__all__ = [
    "HessianReport",
    "sumrate_hessian",
    "lagrangian",
    "indefiniteness_probe",
]


@dataclass(frozen=True)
class HessianReport:
    """Spectrum summary of the symmetrized numerical Hessian.

    ``indefinite`` is true when the spectrum carries both a negative
    and a positive eigenvalue beyond the scale-aware tolerance
    1e-6 * max(1, |max_eig|).  ``asymmetry`` is the max-norm residual
    of the raw (unsymmetrized) estimate, an O(step^2) finite-difference
    artifact useful for step-size diagnostics.
    """

    eigenvalues: np.ndarray
    min_eig: float
    max_eig: float
    indefinite: bool
    asymmetry: float


def _weights_to_coords(w: np.ndarray) -> np.ndarray:
    return np.concatenate([w.real.ravel(), w.imag.ravel()])


def _coords_to_weights(x: np.ndarray, n_bs: int, k_users: int) -> np.ndarray:
    half = n_bs * k_users
    return (x[:half] + 1j * x[half:]).reshape(n_bs, k_users)


def _numerical_hessian(f: Callable[[np.ndarray], float], x0: np.ndarray, step: float) -> np.ndarray:
    """Jacobian of a central-difference gradient, column by column.

    The inner gradient uses half the outer step; the unequal steps leave
    an O(step^2) antisymmetric residual that vanishes under symmetrization
    but is reported for diagnostics.
    """
    dim = x0.size
    h_out = step
    h_in = step / 2.0

    def grad(y: np.ndarray) -> np.ndarray:
        g = np.empty(dim)
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = h_in
            g[j] = (f(y + e) - f(y - e)) / (2.0 * h_in)
        return g

    hess = np.empty((dim, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h_out
        hess[:, i] = (grad(x0 + e) - grad(x0 - e)) / (2.0 * h_out)
    return hess


def sumrate_hessian(ch: ChannelSet, prec: Precoder, step: float = 1e-4) -> HessianReport:
    """Finite-difference Hessian of the sum rate at the given precoder.

    Differentiates w.r.t. the 2 * n_bs * K real coordinates of the
    weight matrix, symmetrizes, and reports the eigen-spectrum.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    n_bs, k_users = prec.weights.shape

    def objective(x: np.ndarray) -> float:
        w = _coords_to_weights(x, n_bs, k_users)
        value = np.sum(np.log2(1.0 + _sinr_of_weights(ch, w)))
        if not np.isfinite(value):
            raise FloatingPointError("sum rate became non-finite during Hessian probing")
        return float(value)

    x0 = _weights_to_coords(prec.weights)
    raw = _numerical_hessian(objective, x0, step)
    asymmetry = float(np.max(np.abs(raw - raw.T)))
    sym = (raw + raw.T) / 2.0
    eigenvalues = np.linalg.eigvalsh(sym)
    min_eig = float(eigenvalues[0])
    max_eig = float(eigenvalues[-1])
    tol = 1e-6 * max(1.0, abs(max_eig))
    return HessianReport(
        eigenvalues=eigenvalues,
        min_eig=min_eig,
        max_eig=max_eig,
        indefinite=(min_eig < -tol and max_eig > tol),
        asymmetry=asymmetry,
    )


def _sinr_of_weights(ch: ChannelSet, w: np.ndarray) -> np.ndarray:
    gains = np.abs(ch.h @ w) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + ch.effective_noise)


def lagrangian(
    ch: ChannelSet,
    prec: Precoder,
    lam: Sequence[float],
    mu: Sequence[float],
    p_bs: float,
    i_m_caps: Optional[Sequence[float]] = None,
) -> float:
    """Dual-penalized objective with normalized constraint terms.

    L = sum_k log2(1 + gamma_k)
        - sum_k lam_k (||w_k||^2 / p_bs - 1)
        - sum_m (mu_m / I_m) (sum_k |g_m w_k|^2 - 1)

    Note the constant -1 inside each penalty bracket, so zero weights
    with unit multipliers give +K from the power terms.
    """
    lam = np.asarray(lam, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if lam.shape != (ch.n_su,):
        raise ValueError(f"lam must have length K={ch.n_su}")
    if mu.shape != (ch.n_pu,):
        raise ValueError(f"mu must have length M={ch.n_pu}")
    if np.any(lam < 0) or np.any(mu < 0):
        raise ValueError("multipliers must be non-negative")
    if not p_bs > 0:
        raise ValueError(f"p_bs must be positive, got {p_bs}")
    if i_m_caps is None:
        caps = np.ones(ch.n_pu)
    else:
        caps = np.asarray(i_m_caps, dtype=np.float64)
        if caps.shape != (ch.n_pu,):
            raise ValueError(f"i_m_caps must have length M={ch.n_pu}")
        if np.any(caps == 0):
            raise ValueError("interference caps must be nonzero")

    value = sum_rate(ch, prec)
    user_power = np.sum(np.abs(prec.weights) ** 2, axis=0)
    value -= float(np.sum(lam * (user_power / p_bs - 1.0)))
    if ch.n_pu:
        leak = np.sum(np.abs(ch.g @ prec.weights) ** 2, axis=1)
        value -= float(np.sum(mu / caps * (leak - 1.0)))
    return value


def indefiniteness_probe(k_users: int, draws: int, seed: int) -> float:
    """Eigenvalue-sign census over random curvature-like matrices.

    Draws K x K matrices with negative real diagonals and complex-normal
    off-diagonal entries and returns the fraction whose eigenvalues have
    real parts of both signs.  This mirrors the random-matrix experiment
    used to corroborate non-concavity; :func:`sumrate_hessian` is the
    stronger, objective-specific check.
    """
    if k_users < 2:
        raise ValueError("need at least a 2x2 matrix for mixed signs")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    mixed = 0
    for _ in range(draws):
        m = (rng.standard_normal((k_users, k_users)) + 1j * rng.standard_normal((k_users, k_users))) / np.sqrt(2)
        np.fill_diagonal(m, -np.abs(rng.standard_normal(k_users)))
        re = np.linalg.eigvals(m).real
        if re.min() < 0 < re.max():
            mixed += 1
    return mixed / draws
