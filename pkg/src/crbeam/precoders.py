"""Beam-direction construction and power allocation.

Three transmit strategies share one interface ``scheme(ch, p_bs) ->
Precoder``: zero forcing with water-filled powers (ZFWF), zero forcing
with a uniform power split (ZFEP), and regularized channel inversion
(MMSE).  The zero-forcing direction design also nulls every primary
user via an orthogonal projection onto the complement of their channel
span, so the leaked primary interference is zero up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelSet, Precoder

__all__ = [
    "WaterfillResult",
    "waterfill",
    "zf_directions",
    "zf_waterfill",
    "zf_equalpower",
    "mmse_precoder",
    "SCHEMES",
]


@dataclass(frozen=True)
class WaterfillResult:
    """Output of the exact water-filling solve.

    ``powers[k]`` is (1/b_k) * max(mu - b_k, 0); users whose cost b_k
    reaches the water level ``mu`` are shut off exactly.  ``active`` is
    the index array of users left on.
    """

    powers: np.ndarray
    mu: float
    active: np.ndarray


def waterfill(b: np.ndarray, p_bs: float) -> WaterfillResult:
    """Exact water level over per-user costs ``b`` for budget ``p_bs``.

    Sorted-threshold search: with b ascending, the water level for r
    active users is mu_r = (p_bs + sum of the r smallest b) / r, and the
    solution is the largest r with mu_r above the r-th cost.  The
    budget identity sum_k max(mu - b_k, 0) = p_bs then holds exactly,
    which equals the transmit power sum_k powers[k] * b_k when b_k is
    the squared norm of beam k.

    Parameters
    ----------
    b : array of float
        Strictly positive per-user costs.
    p_bs : float
        Positive total budget.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("b must be a non-empty 1-D vector")
    if not np.all(np.isfinite(b)) or np.any(b <= 0):
        raise ValueError("water-filling costs must be finite and positive")
    if not p_bs > 0:
        raise ValueError(f"p_bs must be positive, got {p_bs}")

    order = np.argsort(b, kind="stable")
    b_sorted = b[order]
    csum = np.cumsum(b_sorted)
    # r = 1 always qualifies (mu_1 = p_bs + min b exceeds min b), so the
    # final fallthrough needs no test; this also survives budgets too
    # small to register in floating point.
    mu = float(p_bs + b_sorted[0])
    for r in range(b.size, 1, -1):
        mu_r = (p_bs + csum[r - 1]) / r
        if mu_r > b_sorted[r - 1]:
            mu = float(mu_r)
            break
    powers = np.maximum(mu - b, 0.0) / b
    return WaterfillResult(powers=powers, mu=mu, active=np.flatnonzero(powers > 0))


def zf_directions(ch: ChannelSet) -> np.ndarray:
    """Zero-forcing beam directions that also null every primary user.

    Build the orthogonal projector P onto the complement of the primary
    channel span (orthonormalizing the primary rows first, so the
    projection is exact for arbitrary draws), project the user channels,
    and invert the projected channel:

        T' = P H^H,   T = T' (H T')^{-1}

    Columns then satisfy g_m^H t_k = 0, h_i^H t_k = 0 for i != k and
    h_k^H t_k = 1.  One multiplicative refinement pass tightens the
    inversion residual on ill-conditioned draws.
    """
    k_users, n = ch.h.shape
    if not (ch.n_pu + k_users - 1) < n:
        raise ValueError(
            f"zero forcing infeasible: K={k_users}, M={ch.n_pu} requires K <= n_bs - M = {n - ch.n_pu}"
        )
    if ch.n_pu > 0:
        q, _ = np.linalg.qr(ch.g.conj().T)  # orthonormal basis of the primary span
        t_prime = ch.h.conj().T - q @ (q.conj().T @ ch.h.conj().T)
    else:
        t_prime = ch.h.conj().T

    def invert_onto(t_mat: np.ndarray) -> np.ndarray:
        eff = ch.h @ t_mat
        try:
            return t_mat @ np.linalg.inv(eff)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                "projected channel matrix H T' is rank deficient (degenerate draw)"
            ) from exc

    t = invert_onto(t_prime)
    t = invert_onto(t)  # refinement keeps columns in the primary null space
    return t


def zf_waterfill(ch: ChannelSet, p_bs: float) -> Precoder:
    """ZF directions with the capacity-optimal water-filled power split.

    The per-user cost is b_k = ||t_k||^2, the k-th diagonal of the
    inverse projected Gram matrix, so the transmit power lands exactly
    on the budget: sum_k p_k ||t_k||^2 = p_bs.
    """
    t = zf_directions(ch)
    b = np.sum(np.abs(t) ** 2, axis=0)
    wf = waterfill(b, p_bs)
    return Precoder.assemble(t, wf.powers)


def zf_equalpower(ch: ChannelSet, p_bs: float) -> Precoder:
    """ZF directions with one common per-user power filling the budget."""
    t = zf_directions(ch)
    b = np.sum(np.abs(t) ** 2, axis=0)
    powers = np.full(b.size, p_bs / b.sum())
    return Precoder.assemble(t, powers)


def mmse_precoder(ch: ChannelSet, p_bs: float) -> Precoder:
    """Regularized channel inversion scaled to the power budget.

    W0 = H^H (H H^H + alpha I)^{-1} with alpha = K (sigma^2 + I_p) / p_bs,
    then one global scale so the total transmit power equals p_bs.  No
    primary-user nulling is attempted.
    """
    k_users, n = ch.h.shape
    if k_users > n:
        raise ValueError(f"regularized inversion needs K <= n_bs, got K={k_users}, n_bs={n}")
    if not p_bs > 0:
        raise ValueError(f"p_bs must be positive, got {p_bs}")
    alpha = k_users * ch.effective_noise / p_bs
    gram = ch.h @ ch.h.conj().T + alpha * np.eye(k_users)
    w0 = np.linalg.solve(gram.conj().T, ch.h).conj().T
    col_norms = np.linalg.norm(w0, axis=0)
    if np.any(col_norms == 0):
        raise np.linalg.LinAlgError("regularized inversion produced a zero column")
    scale = np.sqrt(p_bs) / np.linalg.norm(w0)
    return Precoder.assemble(w0 / col_norms[None, :], (scale * col_norms) ** 2)


SCHEMES = {
    "ZFWF": zf_waterfill,
    "ZFEP": zf_equalpower,
    "MMSE": mmse_precoder,
}
