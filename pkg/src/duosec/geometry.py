"""Line-of-sight geometry and channel construction.

A transmitter at 2-D ground coordinate ``u`` and altitude ``H`` sees a ground
node at ``v`` through a free-space channel

    h = a(cos_theta) * sqrt(beta / d^2),   d = sqrt(||u - v||^2 + H^2),

where ``a`` is the uniform-linear-array steering vector with inter-element
spacing expressed as a fraction of the carrier wavelength and
``cos_theta = H / d`` (angle measured from the array axis, pointing down).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig


def distance(xy_from, height: float, xy_to) -> np.ndarray | float:
    """Slant range between an airborne array and a ground node."""
    diff = np.asarray(xy_to, dtype=float) - np.asarray(xy_from, dtype=float)
    horiz_sq = np.sum(diff * diff, axis=-1)
    return np.sqrt(horiz_sq + float(height) ** 2)


def cos_aod(height: float, dist) -> np.ndarray | float:
    """Cosine of the departure angle; 1.0 when the node is directly below."""
    return float(height) / np.asarray(dist, dtype=float)


def steering_vector(n_antennas: int, spacing: float, cos_theta) -> np.ndarray:
    """ULA steering vector(s); unit-modulus entries, first entry 1.

    ``cos_theta`` may be scalar or an array; the antenna axis is appended
    last, so the result has shape ``(*cos_theta.shape, n_antennas)``.
    """
    cos_theta = np.asarray(cos_theta, dtype=float)
    k = np.arange(n_antennas)
    phase = 2.0 * np.pi * spacing * cos_theta[..., None] * k
    return np.exp(1j * phase)


def channel_vector(n_antennas: int, spacing: float, pathloss_ref: float,
                   height: float, xy_from, xy_to) -> np.ndarray:
    """LoS channel(s) from an airborne ULA to a ground node."""
    d = np.asarray(distance(xy_from, height, xy_to))
    a = steering_vector(n_antennas, spacing, cos_aod(height, d))
    return a * (np.sqrt(pathloss_ref) / d)[..., None]


def outer(vec: np.ndarray) -> np.ndarray:
    """Rank-one Hermitian outer product(s) v v^H over the last axis."""
    return vec[..., :, None] * np.conj(vec[..., None, :])


@dataclass(frozen=True)
class ChannelSet:
    """Per-slot channels for one pair of trajectories.

    Arrays are indexed by slot (0-based internally, slot s uses waypoint
    s+1) and share the layout (n_slots, ...). Suffixes: a=source UAV,
    j=jamming UAV, b=user, e=eavesdropper, t=sensing targets.
    """

    n_slots: int
    n_antennas: int
    h_ab: np.ndarray  # (N, M) complex
    h_ae: np.ndarray
    h_jb: np.ndarray
    h_je: np.ndarray
    d_ab: np.ndarray  # (N,)
    d_ae: np.ndarray
    d_jb: np.ndarray
    d_je: np.ndarray
    a_at: np.ndarray  # (N, K, M) steering toward targets, source UAV
    a_jt: np.ndarray
    d_at: np.ndarray  # (N, K)
    d_jt: np.ndarray

    def slot_outer(self, name: str, slot: int) -> np.ndarray:
        """Hermitian matrix h h^H for channel ``name`` in one slot."""
        return outer(getattr(self, name)[slot])


def build_channel_set(cfg: ScenarioConfig, traj_alice, traj_jack) -> ChannelSet:
    """Evaluate every link along the two trajectories.

    Trajectory arguments may be (N+1, 2) waypoint arrays or objects with a
    ``waypoints`` attribute; channels are evaluated at waypoints 1..N (the
    position flown during each slot).
    """
    wp_a = np.asarray(getattr(traj_alice, "waypoints", traj_alice), dtype=float)
    wp_j = np.asarray(getattr(traj_jack, "waypoints", traj_jack), dtype=float)
    n = cfg.n_slots
    if wp_a.shape != (n + 1, 2) or wp_j.shape != (n + 1, 2):
        raise ValueError(f"expected ({n + 1}, 2) waypoint arrays")
    pos_a, pos_j = wp_a[1:], wp_j[1:]

    m = cfg.n_antennas
    spacing = cfg.antenna_spacing
    beta = cfg.pathloss_ref
    h_alice, h_jack = cfg.height["alice"], cfg.height["jack"]
    bob = np.asarray(cfg.bob_pos)
    eve = np.asarray(cfg.eve_pos)
    targets = np.asarray(cfg.targets, dtype=float).reshape(-1, 2)

    d_ab = np.asarray(distance(pos_a, h_alice, bob))
    d_ae = np.asarray(distance(pos_a, h_alice, eve))
    d_jb = np.asarray(distance(pos_j, h_jack, bob))
    d_je = np.asarray(distance(pos_j, h_jack, eve))

    d_at = np.asarray(distance(pos_a[:, None, :], h_alice, targets[None, :, :]))
    d_jt = np.asarray(distance(pos_j[:, None, :], h_jack, targets[None, :, :]))

    cs = ChannelSet(
        n_slots=n,
        n_antennas=m,
        h_ab=channel_vector(m, spacing, beta, h_alice, pos_a, bob),
        h_ae=channel_vector(m, spacing, beta, h_alice, pos_a, eve),
        h_jb=channel_vector(m, spacing, beta, h_jack, pos_j, bob),
        h_je=channel_vector(m, spacing, beta, h_jack, pos_j, eve),
        d_ab=d_ab, d_ae=d_ae, d_jb=d_jb, d_je=d_je,
        a_at=steering_vector(m, spacing, cos_aod(h_alice, d_at)),
        a_jt=steering_vector(m, spacing, cos_aod(h_jack, d_jt)),
        d_at=d_at, d_jt=d_jt,
    )
    for name in ("h_ab", "h_ae", "h_jb", "h_je", "a_at", "a_jt"):
        if not np.all(np.isfinite(getattr(cs, name).view(float))):
            raise ValueError(f"non-finite channel values in {name}")
    return cs
