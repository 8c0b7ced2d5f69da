"""Attractive/repulsive force and potential computations.

Two weightings are provided: the blended form used by the navigation method
(rotated, normalized attractive force mixed with repulsion by a weight in
(0, 1)) and the classic weighted sum kept for the plain gradient baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Scan


@dataclass(frozen=True)
class PotentialParams:
    """Weights and ranges for force computation.

    blend_weight is the attractive/repulsive balance in (0, 1); att_gain and
    rep_gain only affect the classic weighted-sum baseline. force_threshold
    defaults to half the sensor range and is shared with the mode switch and
    the velocity taper.
    """

    max_range: float = 10.0
    blend_weight: float = 0.7
    att_gain: float = 1.0
    rep_gain: float = 1.0
    force_threshold: float | None = None

    def __post_init__(self):
        if not 0.0 < self.blend_weight < 1.0:
            raise ValueError("blend_weight must lie in (0, 1)")
        if self.att_gain <= 0 or self.rep_gain <= 0:
            raise ValueError("att_gain and rep_gain must be positive")
        if self.force_threshold is None:
            object.__setattr__(self, "force_threshold", 0.5 * self.max_range)

    @property
    def f_thr(self) -> float:
        return float(self.force_threshold)  # type: ignore[arg-type]


@dataclass(frozen=True)
class ForceSet:
    """All force vectors and potentials for one control step."""

    f_att: np.ndarray
    f_att_rot: np.ndarray
    f_rep: np.ndarray
    f_tot: np.ndarray
    u_att: float
    u_rep: float

    @property
    def magnitude(self) -> float:
        return float(np.hypot(self.f_tot[0], self.f_tot[1]))


def attractive_force(g_rel: np.ndarray) -> np.ndarray:
    """Goal-seeking force: the identity gradient of |g|^2 / 2."""
    return np.asarray(g_rel, dtype=float).copy()


def attractive_potential(g_rel: np.ndarray) -> float:
    g = np.asarray(g_rel, dtype=float)
    return 0.5 * float(g @ g)


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def normalized_attractive(g_rel: np.ndarray, rot_angle: float, max_range: float) -> np.ndarray:
    """Attractive force rotated by rot_angle and rescaled to magnitude max_range.

    Zero relative goal yields a zero vector (the caller treats that state as
    arrival before forces matter).
    """
    g = np.asarray(g_rel, dtype=float)
    norm = float(np.hypot(g[0], g[1]))
    if norm == 0.0:
        return np.zeros(2)
    unit = g / norm
    return rotation_matrix(rot_angle) @ (max_range * unit)


def repulsive_force(scan: Scan) -> np.ndarray:
    """Sum of per-ray push-back terms, each anti-parallel to its ray with
    magnitude 1/|l|^3. Rays at max range (or zero) contribute nothing."""
    mask = scan.hit_mask
    if not mask.any():
        return np.zeros(2)
    vec = scan.vectors()[mask]
    norms = scan.ranges[mask]
    return -(vec / (norms**4)[:, None]).sum(axis=0)


def repulsive_potential(scan: Scan) -> float:
    mask = scan.hit_mask
    if not mask.any():
        return 0.0
    norms = scan.ranges[mask]
    return float((0.5 / norms**2).sum())


def total_force(
    g_rel: np.ndarray, rot_angle: float, scan: Scan, params: PotentialParams
) -> ForceSet:
    """Blended total force: w * rotated-normalized attraction + (1-w) * repulsion."""
    f_att = attractive_force(g_rel)
    f_att_rot = normalized_attractive(g_rel, rot_angle, params.max_range)
    f_rep = repulsive_force(scan)
    w = params.blend_weight
    f_tot = w * f_att_rot + (1.0 - w) * f_rep
    return ForceSet(
        f_att=f_att,
        f_att_rot=f_att_rot,
        f_rep=f_rep,
        f_tot=f_tot,
        u_att=attractive_potential(g_rel),
        u_rep=repulsive_potential(scan),
    )


def retarget_rotation(
    fs: ForceSet, g_rel: np.ndarray, rot_angle: float, params: PotentialParams
) -> ForceSet:
    """Rebuild a blended ForceSet for a new rotation angle, reusing the
    (angle-independent) repulsive terms."""
    f_att_rot = normalized_attractive(g_rel, rot_angle, params.max_range)
    w = params.blend_weight
    return ForceSet(
        f_att=fs.f_att,
        f_att_rot=f_att_rot,
        f_rep=fs.f_rep,
        f_tot=w * f_att_rot + (1.0 - w) * fs.f_rep,
        u_att=fs.u_att,
        u_rep=fs.u_rep,
    )


def total_force_vanilla(g_rel: np.ndarray, scan: Scan, params: PotentialParams) -> ForceSet:
    """Classic weighted sum: att_gain * attraction + rep_gain * repulsion."""
    f_att = attractive_force(g_rel)
    f_rep = repulsive_force(scan)
    f_tot = params.att_gain * f_att + params.rep_gain * f_rep
    return ForceSet(
        f_att=f_att,
        f_att_rot=normalized_attractive(g_rel, 0.0, params.max_range),
        f_rep=f_rep,
        f_tot=f_tot,
        u_att=attractive_potential(g_rel),
        u_rep=repulsive_potential(scan),
    )
