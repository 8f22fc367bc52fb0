"""Synthetic scalar fields on [-1, 1]^3 used by tests, bundled assets and
benchmarks, plus the seeded random-block sampler for distribution studies.

Field constants are frozen literals so results do not depend on RNG stream
details.
"""

from __future__ import annotations

import numpy as np

from .inr import ScalarVolume, grid_points

DOMAIN_LOWER = np.array([-1.0, -1.0, -1.0])
DOMAIN_UPPER = np.array([1.0, 1.0, 1.0])

# (amplitude, cx, cy, cz, width) per blob
_GAUSS_BLOBS = (
    (0.897642, -0.041713, -0.113119, -0.212121, 0.334030),
    (-0.818691, 0.497163, 0.070138, -0.429673, 0.251720),
    (0.913628, 0.335669, 0.298594, -0.247285, 0.354825),
    (-0.673322, 0.125036, 0.505257, -0.214081, 0.189712),
    (0.685389, -0.030330, 0.375679, 0.635696, 0.233882),
    (-0.826842, 0.480138, -0.047290, -0.585865, 0.229635),
    (0.821902, -0.605030, -0.413210, 0.541193, 0.335179),
    (-0.754149, 0.641210, 0.342962, 0.587768, 0.370555),
)

SPHERE_RADIUS = 0.5
TORUS_MAJOR = 0.55
TORUS_MINOR = 0.25


def field_trig(pts: np.ndarray) -> np.ndarray:
    """sin(4x) cos(4y) + z."""
    pts = np.atleast_2d(pts)
    return np.sin(4.0 * pts[:, 0]) * np.cos(4.0 * pts[:, 1]) + pts[:, 2]


def field_gaussians(pts: np.ndarray) -> np.ndarray:
    """Sum of eight fixed Gaussian blobs of alternating sign."""
    pts = np.atleast_2d(pts)
    out = np.zeros(pts.shape[0])
    for amp, cx, cy, cz, width in _GAUSS_BLOBS:
        d2 = ((pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2
              + (pts[:, 2] - cz) ** 2)
        out += amp * np.exp(-d2 / (2.0 * width * width))
    return out


def field_sphere(pts: np.ndarray) -> np.ndarray:
    """Signed distance to the origin-centered sphere of radius 0.5."""
    pts = np.atleast_2d(pts)
    return np.sqrt((pts ** 2).sum(axis=1)) - SPHERE_RADIUS


def field_torus(pts: np.ndarray) -> np.ndarray:
    """Signed distance to a z-axis torus (major 0.55, minor 0.25)."""
    pts = np.atleast_2d(pts)
    ring = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2) - TORUS_MAJOR
    return np.sqrt(ring ** 2 + pts[:, 2] ** 2) - TORUS_MINOR


FIELDS = {
    "trig": field_trig,
    "gaussians": field_gaussians,
    "sphere": field_sphere,
    "torus": field_torus,
}

# iso-values that produce interesting surfaces on each field
DEFAULT_ISO = {
    "trig": 0.0,
    "gaussians": 0.25,
    "sphere": 0.0,
    "torus": 0.0,
}


def synth_volume(name: str, resolution: int | tuple[int, int, int]) -> ScalarVolume:
    if isinstance(resolution, int):
        resolution = (resolution, resolution, resolution)
    pts = grid_points(DOMAIN_LOWER, DOMAIN_UPPER, resolution)
    return ScalarVolume(dims=tuple(resolution), data=FIELDS[name](pts))


def random_blocks(lower, upper, n: int, seed: int,
                  min_frac: float = 0.05, max_frac: float = 0.25):
    """Seeded random sub-cubes of the domain (edge length a uniform fraction
    of the smallest axis extent)."""
    lower = np.asarray(lower, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x810C)))
    extent = upper - lower
    edge_base = float(extent.min())
    blocks = []
    for _ in range(n):
        size = rng.uniform(min_frac, max_frac) * edge_base
        lo = lower + rng.uniform(0.0, 1.0, lower.size) * (extent - size)
        blocks.append((lo, lo + size))
    return blocks
