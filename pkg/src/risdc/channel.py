"""Far-field geometric MIMO channel generation for the two segmented links.

The base-station -> RIS matrix G is N x M and each RIS -> UE matrix H_k is
stored as N x K so that the downlink cascade reads h^H Theta g.  All
randomness is drawn from counter-derived streams so every realization is a
pure function of (master_seed, trial_index, link id).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

# Offsets into the per-trial stream space: link id 0 is G, 1 + k is UE k.
G_LINK_ID = 0
UE_LINK_ID_BASE = 1


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array layout. ULA along the first axis, UPA nx-by-ny.

    spacing is in carrier wavelengths (0.5 = half-wavelength).
    """

    kind: str
    nx: int
    ny: int = 1
    spacing: float = 0.5

    def __post_init__(self):
        if self.kind not in ("ULA", "UPA"):
            raise ConfigurationError(f"unknown array kind {self.kind!r}")
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError("element counts must be >= 1")
        if self.kind == "ULA" and self.ny != 1:
            raise ConfigurationError("ULA requires ny = 1")
        if not self.spacing > 0:
            raise ConfigurationError("spacing must be positive")

    @property
    def n(self) -> int:
        return self.nx * self.ny


def ula(n: int, spacing: float = 0.5) -> ArrayGeometry:
    return ArrayGeometry("ULA", n, 1, spacing)


def upa(nx: int, ny: int, spacing: float = 0.5) -> ArrayGeometry:
    return ArrayGeometry("UPA", nx, ny, spacing)


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: complex gain plus departure/arrival angles."""

    gain: complex
    azimuth_tx: float
    elevation_tx: float
    azimuth_rx: float
    elevation_rx: float

    def __post_init__(self):
        for az in (self.azimuth_tx, self.azimuth_rx):
            if not (math.isfinite(az) and -math.pi <= az <= math.pi):
                raise DomainError(f"azimuth {az} outside [-pi, pi]")
        for el in (self.elevation_tx, self.elevation_rx):
            if not (math.isfinite(el) and -math.pi / 2 <= el <= math.pi / 2):
                raise DomainError(f"elevation {el} outside [-pi/2, pi/2]")


@dataclass(frozen=True)
class ChannelConfig:
    """Statistics of one channel draw.

    Path 1 always carries a unit-modulus LoS gain; additional paths are
    CN(0, 1).  los_only pins the draw to the single LoS path.
    """

    carrier_hz: float
    num_paths: int = 1
    los_only: bool = True

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ConfigurationError("carrier_hz must be positive")
        if self.num_paths < 1:
            raise ConfigurationError("num_paths must be >= 1")
        if self.los_only and self.num_paths != 1:
            raise ConfigurationError("los_only requires num_paths = 1")


@dataclass(frozen=True)
class SeedRecord:
    """Everything needed to regenerate a LinkRealization bit-exactly."""

    master_seed: int
    trial_index: int
    link_ids: tuple


@dataclass(frozen=True)
class LinkRealization:
    """One Monte Carlo draw: G (N x M) and one H_k (N x K) per UE."""

    g: np.ndarray
    h_per_ue: tuple
    seed_record: SeedRecord


def steering_vector(geom: ArrayGeometry, azimuth: float, elevation: float = 0.0) -> np.ndarray:
    """Unit-modulus array response, row-major element order (second axis fastest).

    Entry for element (ix, iy) is
    exp(j 2 pi spacing (ix sin(az) cos(el) + iy sin(el))).
    """
    if not (math.isfinite(azimuth) and -math.pi <= azimuth <= math.pi):
        raise DomainError(f"azimuth {azimuth} outside [-pi, pi]")
    if not (math.isfinite(elevation) and -math.pi / 2 <= elevation <= math.pi / 2):
        raise DomainError(f"elevation {elevation} outside [-pi/2, pi/2]")
    ix = np.repeat(np.arange(geom.nx), geom.ny)
    iy = np.tile(np.arange(geom.ny), geom.nx)
    phase = 2.0 * np.pi * geom.spacing * (
        ix * np.sin(azimuth) * np.cos(elevation) + iy * np.sin(elevation)
    )
    return np.exp(1j * phase)


def synthesize_channel(tx: ArrayGeometry, rx: ArrayGeometry, paths) -> np.ndarray:
    """Sum-of-paths far-field channel, shape (rx.n, tx.n), rank <= len(paths).

    Returns sqrt(1/P) * sum_p gain_p * a_rx(p) a_tx(p)^H; the 1/P scaling
    keeps average energy independent of path count.
    """
    paths = list(paths)
    if not paths:
        raise DomainError("synthesize_channel requires at least one path")
    out = np.zeros((rx.n, tx.n), dtype=np.complex128)
    for p in paths:
        a_rx = steering_vector(rx, p.azimuth_rx, p.elevation_rx)
        a_tx = steering_vector(tx, p.azimuth_tx, p.elevation_tx)
        out += p.gain * np.outer(a_rx, a_tx.conj())
    return out / math.sqrt(len(paths))


def link_stream(master_seed: int, trial_index: int, link_id: int) -> np.random.Generator:
    """Deterministic, non-overlapping random stream for one (trial, link) pair."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index, link_id))
    return np.random.default_rng(ss)


def _sample_paths(cfg: ChannelConfig, rng: np.random.Generator):
    paths = []
    for p in range(cfg.num_paths):
        az_tx = rng.uniform(-math.pi, math.pi)
        el_tx = rng.uniform(-math.pi / 2, math.pi / 2)
        az_rx = rng.uniform(-math.pi, math.pi)
        el_rx = rng.uniform(-math.pi / 2, math.pi / 2)
        if p == 0:
            gain = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        else:
            gain = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
        paths.append(PathComponent(gain, az_tx, el_tx, az_rx, el_rx))
    return paths


def draw_link(
    cfg: ChannelConfig,
    tx: ArrayGeometry,
    ris: ArrayGeometry,
    ue_geoms,
    master_seed: int,
    trial_index: int,
    link_base: int = 0,
) -> LinkRealization:
    """Draw G and each H_k from independent streams keyed by (seed, trial, link).

    link_base shifts the link-id namespace so independent calls (e.g. one per
    UE in the multi-user scenario) never share a stream.
    """
    if trial_index < 0:
        raise DomainError("trial_index must be nonnegative")
    ue_geoms = list(ue_geoms)
    if not ue_geoms:
        raise ConfigurationError("at least one UE geometry required")

    link_ids = [link_base + G_LINK_ID]
    rng = link_stream(master_seed, trial_index, link_ids[0])
    g = synthesize_channel(tx, ris, _sample_paths(cfg, rng))

    hs = []
    for k, ue in enumerate(ue_geoms):
        lid = link_base + UE_LINK_ID_BASE + k
        link_ids.append(lid)
        rng = link_stream(master_seed, trial_index, lid)
        # stored N x K so the downlink cascade is h^H Theta g
        hs.append(synthesize_channel(ue, ris, _sample_paths(cfg, rng)))

    record = SeedRecord(master_seed, trial_index, tuple(link_ids))
    return LinkRealization(g=g, h_per_ue=tuple(hs), seed_record=record)
