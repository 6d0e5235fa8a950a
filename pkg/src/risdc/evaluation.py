"""Effective-channel assembly, precoding, and achievable-rate evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DomainError
from .regulation import RegulationMatrix


@dataclass(frozen=True)
class LinkBudget:
    """Bandwidth, transmit power, noise variance, and element-count scaling.

    element_scaling is the literal N in the rate formula's rho/(N sigma^2)
    denominator; apply_element_scaling=False falls back to plain rho/sigma^2.
    """

    bandwidth_hz: float = 1.0
    tx_power: float = 10.0
    noise_var: float = 1.0
    element_scaling: int = 1
    apply_element_scaling: bool = True

    def __post_init__(self):
        if not (self.bandwidth_hz > 0 and self.tx_power > 0 and self.noise_var > 0):
            raise DomainError("bandwidth, power and noise variance must be positive")
        if self.element_scaling < 1:
            raise DomainError("element_scaling must be >= 1")

    @property
    def gain_scale(self) -> float:
        if self.apply_element_scaling:
            return self.tx_power / (self.element_scaling * self.noise_var)
        return self.tx_power / self.noise_var

    def with_elements(self, n: int) -> "LinkBudget":
        return replace(self, element_scaling=n)

    def with_power(self, p: float) -> "LinkBudget":
        return replace(self, tx_power=p)


@dataclass(frozen=True)
class PrecoderResult:
    """Unit-Frobenius-norm transmit matrix, columns = scaled stream directions."""

    f: np.ndarray
    num_streams: int
    per_stream_power: np.ndarray


def effective_channel(h: np.ndarray, theta: RegulationMatrix, g: np.ndarray) -> np.ndarray:
    """h^H Theta g (K x M) without forming N x N for thin or diagonal Theta."""
    h = np.asarray(h, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    if h.ndim == 1:
        h = h[:, None]
    if h.shape[0] != theta.n or g.shape[0] != theta.n:
        raise DomainError(
            f"dimension mismatch: h {h.shape}, g {g.shape}, theta.n {theta.n}"
        )
    hh = h.conj().T
    if theta.kind == "diagonal":
        return (hh * theta.phases[None, :]) @ g
    if theta.kind == "full":
        return (hh @ theta.full) @ g
    out = None
    for a, b in theta.factors:
        term = (hh @ a) @ (b @ g)
        out = term if out is None else out + term
    return out


def design_precoder(h_dl: np.ndarray, num_streams: int = 1) -> PrecoderResult:
    """Top-L right singular vectors of the downlink channel, uniform power split."""
    h_dl = np.atleast_2d(np.asarray(h_dl, dtype=np.complex128))
    k, m = h_dl.shape
    if num_streams < 1 or num_streams > min(k, m):
        raise DomainError(f"num_streams {num_streams} invalid for channel {h_dl.shape}")
    if not np.any(h_dl):
        raise DomainError("zero channel: no precoder exists, rate is 0")
    _, _, vh = np.linalg.svd(h_dl, full_matrices=False)
    f = vh[:num_streams].conj().T / math.sqrt(num_streams)
    power = np.full(num_streams, 1.0 / num_streams)
    return PrecoderResult(f=f, num_streams=num_streams, per_stream_power=power)


def achievable_rate(h_dl: np.ndarray, f: PrecoderResult, budget: LinkBudget) -> float:
    """B log2 det(I + c H F F^H H^H), via singular values of sqrt(c) H F."""
    h_dl = np.atleast_2d(np.asarray(h_dl, dtype=np.complex128))
    if not np.all(np.isfinite(h_dl.view(np.float64))):
        raise DomainError("non-finite channel entries")
    a = math.sqrt(budget.gain_scale) * (h_dl @ f.f)
    s = np.linalg.svd(a, compute_uv=False)
    return float(budget.bandwidth_hz * np.sum(np.log2(1.0 + s**2)))


def decoupled_rate_closed_form(svd_g, svd_h, budget: LinkBudget, num_streams: int = 1) -> float:
    """Rate of the decoupled cascade from singular-value products alone.

    B * sum_i log2(1 + c/L * sigma_H,i^2 sigma_G,i^2) for i = 1..L.
    """
    s_g = np.asarray(svd_g.s, dtype=np.float64)
    s_h = np.asarray(svd_h.s, dtype=np.float64)
    if num_streams < 1 or num_streams > min(s_g.size, s_h.size):
        raise DomainError(
            f"num_streams {num_streams} exceeds available singular values "
            f"({s_h.size} x {s_g.size})"
        )
    c = budget.gain_scale / num_streams
    prod = s_h[:num_streams] * s_g[:num_streams]
    return float(budget.bandwidth_hz * np.sum(np.log2(1.0 + c * prod**2)))


def _rate_for_theta(h, theta, g, budget, num_streams=1):
    """Effective channel -> precoder -> rate, with the zero-channel shortcut."""
    eff = effective_channel(h, theta, g)
    if not np.any(eff):
        return 0.0
    f = design_precoder(eff, num_streams)
    return achievable_rate(eff, f, budget)


def multiuser_sum_rate(
    links,
    theta,
    budget: LinkBudget,
    power_split: Sequence[float] | None = None,
    num_streams: int = 1,
):
    """Per-UE and sum rate over orthogonal (interference-free) resources.

    links: a single LinkRealization (shared G, one h per UE) or a sequence of
    per-UE LinkRealizations.  theta: one RegulationMatrix applied to every UE,
    or a sequence with one entry per UE.
    """
    if hasattr(links, "h_per_ue"):
        pairs = [(links.g, h) for h in links.h_per_ue]
    else:
        pairs = [(lk.g, lk.h_per_ue[0]) for lk in links]
    n_ue = len(pairs)
    thetas = list(theta) if isinstance(theta, (list, tuple)) else [theta] * n_ue
    if len(thetas) != n_ue:
        raise DomainError(f"{len(thetas)} regulation matrices for {n_ue} UEs")
    if power_split is None:
        power_split = [budget.tx_power / n_ue] * n_ue
    power_split = [float(p) for p in power_split]
    if len(power_split) != n_ue:
        raise DomainError("power_split length must match UE count")
    if sum(power_split) > budget.tx_power * (1.0 + 1e-12):
        raise DomainError(
            f"power split sums to {sum(power_split)} > budget {budget.tx_power}"
        )
    rates = []
    for (g_k, h_k), th_k, p_k in zip(pairs, thetas, power_split):
        rates.append(_rate_for_theta(h_k, th_k, g_k, budget.with_power(p_k), num_streams))
    return rates, float(sum(rates))
