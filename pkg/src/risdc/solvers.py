"""Regulation-matrix solvers: SVD cascaded-channel decoupling, the K=1
diagonal closed form, an alternating-optimization baseline, and the
multi-user weighted combiner."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NumericalError
from .evaluation import LinkBudget
from .regulation import RegulationMatrix, _stiefel_sample


class SVDFactors(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray


@dataclass(frozen=True)
class DecoupledSolution:
    """Theta split into receive-response (theta1) and output-regulation (theta2)."""

    theta1: np.ndarray
    theta2: np.ndarray
    theta: RegulationMatrix
    svd_g: SVDFactors
    svd_h: SVDFactors


@dataclass(frozen=True)
class PAWeights:
    """Complex combining weights; passivity requires sum of moduli <= 1."""

    alphas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=np.complex128).ravel())
        if np.sum(np.abs(self.alphas)) > 1.0 + 1e-12:
            raise DomainError(
                f"sum of weight moduli {np.sum(np.abs(self.alphas))} exceeds 1"
            )

    @classmethod
    def uniform(cls, k: int) -> "PAWeights":
        return cls(np.full(k, 1.0 / k, dtype=np.complex128))


def _check_finite(a, name):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if not np.all(np.isfinite(a.view(np.float64))):
        raise DomainError(f"{name} contains non-finite entries")
    return a


def _svd_phase_fixed(a: np.ndarray, full_matrices: bool = False) -> SVDFactors:
    """SVD with a fixed phase convention for bit-reproducible factors.

    Each left singular vector's first above-threshold component is made
    real-positive, absorbing the phase into the matching right factor;
    completion columns/rows get the same fix applied directly.
    """
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge on shape {a.shape}: {exc}") from exc
    u = u.copy()
    vh = vh.copy()
    r = s.shape[0]
    for j in range(u.shape[1]):
        nz = np.flatnonzero(np.abs(u[:, j]) > 1e-12)
        if nz.size == 0:
            continue
        ph = u[nz[0], j] / abs(u[nz[0], j])
        u[:, j] *= np.conj(ph)
        if j < r and j < vh.shape[0]:
            vh[j, :] *= ph
    for j in range(r, vh.shape[0]):
        nz = np.flatnonzero(np.abs(vh[j, :]) > 1e-12)
        if nz.size:
            ph = vh[j, nz[0]] / abs(vh[j, nz[0]])
            vh[j, :] *= np.conj(ph)
    return SVDFactors(u, s, vh)


def svd_decouple(g: np.ndarray, h: np.ndarray) -> DecoupledSolution:
    """Full N x N decoupling: Theta = V_H U_G^H, a unitary product.

    theta1 = U_G^H matches the NB->RIS channel (virtual receive response);
    theta2 = V_H matches the RIS->UE channel (virtual regulated transmit).
    """
    g = _check_finite(g, "g")
    h = _check_finite(h, "h")
    if g.shape[0] != h.shape[0]:
        raise DomainError(f"g has {g.shape[0]} RIS rows, h has {h.shape[0]}")
    svd_g = _svd_phase_fixed(g, full_matrices=True)
    svd_h = _svd_phase_fixed(h.conj().T, full_matrices=True)
    theta1 = svd_g.u.conj().T
    theta2 = svd_h.vh.conj().T
    theta = RegulationMatrix.from_full(theta2 @ theta1)
    return DecoupledSolution(theta1=theta1, theta2=theta2, theta=theta, svd_g=svd_g, svd_h=svd_h)


def thin_decouple(g: np.ndarray, h: np.ndarray) -> DecoupledSolution:
    """Rank-K decoupling with O(N(K+M)) memory; never materializes N x N.

    Keeps the K leading columns of V_H and the matching K rows of U_G^H.
    The per-UE effective channel is identical to the full solution because
    h^H V_H is zero outside its first K columns.
    """
    g = _check_finite(g, "g")
    h = _check_finite(h, "h")
    if g.shape[0] != h.shape[0]:
        raise DomainError(f"g has {g.shape[0]} RIS rows, h has {h.shape[0]}")
    n, k = h.shape
    svd_g = _svd_phase_fixed(g, full_matrices=False)
    svd_h = _svd_phase_fixed(h.conj().T, full_matrices=False)
    a = svd_h.vh.conj().T  # N x K, leading columns of V_H
    ugh = svd_g.u.conj().T  # min(N, M) x N
    if k <= ugh.shape[0]:
        b = ugh[:k, :]
    else:
        # rows past rank contribute zero to U_G^H g; pad deterministically
        b = np.zeros((k, n), dtype=np.complex128)
        b[: ugh.shape[0], :] = ugh
    theta = RegulationMatrix.from_thin(a, b)
    return DecoupledSolution(theta1=b, theta2=a, theta=theta, svd_g=svd_g, svd_h=svd_h)


def k1_phase_align(h: np.ndarray, g_eff: np.ndarray) -> RegulationMatrix:
    """Single-antenna diagonal closed form: align each element's phase.

    theta_i = exp(j (arg h_i - arg g_i)) so the scalar cascade becomes
    sum_i |h_i| |g_i|, the maximum over diagonal unit-modulus regulation.
    """
    h = np.asarray(h, dtype=np.complex128).ravel()
    g_eff = np.asarray(g_eff, dtype=np.complex128).ravel()
    if h.shape != g_eff.shape:
        raise DomainError(f"length mismatch: h {h.shape[0]}, g_eff {g_eff.shape[0]}")
    phase = np.where(
        (np.abs(h) > 0) & (np.abs(g_eff) > 0),
        np.angle(h) - np.angle(g_eff),
        0.0,
    )
    return RegulationMatrix.from_diagonal(np.exp(1j * phase))


def ao_diagonal_solve(
    g: np.ndarray,
    h: np.ndarray,
    budget: LinkBudget,
    max_iters: int = 50,
    rel_tol: float = 1e-4,
):
    """Alternating optimization over a diagonal Theta and single-stream precoder.

    Alternates (i) dominant singular pair of the effective channel for the
    precoder f and combiner u, (ii) coordinate-wise optimal phase alignment
    theta_i = exp(j (arg (h u)_i - arg (g f)_i)).  The recorded single-stream
    rate is non-decreasing by construction.

    Returns (diagonal RegulationMatrix, precoder vector f, rate history).
    """
    if max_iters < 1:
        raise DomainError("max_iters must be >= 1")
    if not rel_tol > 0:
        raise DomainError("rel_tol must be positive")
    g = _check_finite(g, "g")
    h = _check_finite(h, "h")
    n, m = g.shape
    c = budget.gain_scale
    b_hz = budget.bandwidth_hz

    if not np.any(g) or not np.any(h):
        theta = RegulationMatrix.from_diagonal(np.ones(n, dtype=np.complex128))
        f = np.zeros(m, dtype=np.complex128)
        f[0] = 1.0
        return theta, f, [0.0]

    theta = np.ones(n, dtype=np.complex128)
    hh = h.conj().T
    history: list[float] = []
    f = None
    for _ in range(max_iters):
        eff = (hh * theta[None, :]) @ g
        try:
            u, s, vh = np.linalg.svd(eff, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed in AO iteration: {exc}") from exc
        f = vh[0].conj()
        u0 = u[:, 0]
        hu = h @ u0
        gf = g @ f
        theta = np.exp(1j * (np.angle(hu) - np.angle(gf)))
        gain = float(np.sum(np.abs(hu) * np.abs(gf)))
        rate = b_hz * math.log2(1.0 + c * gain * gain)
        history.append(rate)
        if len(history) > 1 and history[-2] > 0:
            if abs(history[-1] - history[-2]) < rel_tol * history[-2]:
                break
    return RegulationMatrix.from_diagonal(theta), f, history


def pa_combine(thetas, weights: PAWeights) -> RegulationMatrix:
    """Weighted sum of per-UE regulation matrices, Theta_mu = sum_k alpha_k Theta_k.

    Stays in factored form when every input is thin; the result's spectral
    norm is bounded by the sum of weight moduli, hence <= 1 (passivity).
    """
    thetas = list(thetas)
    alphas = weights.alphas
    if len(thetas) != alphas.shape[0]:
        raise DomainError(f"{len(thetas)} matrices but {alphas.shape[0]} weights")
    n = thetas[0].n
    if any(t.n != n for t in thetas):
        raise DomainError("regulation matrices must share the element count")
    if all(t.kind in ("thin", "thin_sum") for t in thetas):
        pairs = []
        for t, a_k in zip(thetas, alphas):
            for a, b in t.factors:
                pairs.append((a_k * a, b))
        return RegulationMatrix.from_thin_sum(pairs)
    out = np.zeros((n, n), dtype=np.complex128)
    for t, a_k in zip(thetas, alphas):
        out += a_k * t.as_full()
    return RegulationMatrix.from_full(out)


def haar_rotate_channels(h_list, stream: np.random.Generator):
    """Images {Theta^H h_k} under one shared Haar unitary, without forming Theta.

    Stacks the h_k, takes a QR factor Q, and replaces Theta^H Q by a uniform
    orthonormal frame of the same size, which is exactly its distribution.
    Cost O(N (sum K)^2) instead of O(N^2).
    """
    h_list = [np.asarray(h, dtype=np.complex128) for h in h_list]
    n = h_list[0].shape[0]
    if any(h.shape[0] != n for h in h_list):
        raise DomainError("channel matrices must share the RIS element count")
    stacked = np.concatenate(h_list, axis=1)
    q, r = np.linalg.qr(stacked)
    w = _stiefel_sample(n, q.shape[1], stream)
    rotated = w @ r
    out = []
    col = 0
    for h in h_list:
        k = h.shape[1]
        out.append(rotated[:, col : col + k])
        col += k
    return out
