"""Synthetic test images and seeded, portable Gaussian noise.

The noise source is deliberately *not* the platform RNG. It is a fixed,
documented counter-based construction so that any implementation, in any
language, can reproduce the exact same noise field from ``(seed, shape,
variance)``:

1. Pixel ``(i, j)`` of an ``M x N`` grid has linear index ``k = i*N + j``
   and consumes the two counters ``2k`` and ``2k + 1``.
2. Counter ``t`` is turned into 64 pseudo-random bits with the splitmix64
   output function applied to ``seed + (t + 1) * 0x9E3779B97F4A7C15``, all
   arithmetic modulo 2**64:

       z ^= z >> 30;  z *= 0xBF58476D1CE4B9B9
       z ^= z >> 27;  z *= 0x94D049BB133111EB
       z ^= z >> 31

3. A uniform in (0, 1] is ``((z >> 11) + 1) * 2**-53``.
4. The two uniforms ``(q1, q2)`` of a pixel give one standard normal via
   the Box-Muller cosine branch: ``sqrt(-2 ln q1) * cos(2 pi q2)``.

The integer stream is exactly reproducible everywhere; the float transform
is reproducible up to the platform's libm (bit-identical across runs on one
platform, which is what the determinism guarantees here promise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "RingSpec",
    "NoiseSpec",
    "make_rings",
    "add_gaussian_noise",
    "gaussian_field",
    "DEFAULT_RADII",
    "DEFAULT_INTENSITIES",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4B9B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1

# Canonical ring geometry, defined at 512x512 and scaled for other sizes.
# Version 1; changing it invalidates recorded experiment outputs.
DEFAULT_RADII = (60.0, 110.0, 160.0, 210.0)
DEFAULT_INTENSITIES = (0.15, 0.85, 0.15, 0.85, 0.15)


@dataclass(frozen=True)
class RingSpec:
    """Geometry of a concentric-rings test image.

    ``radii`` are strictly ascending circle radii in pixels; ``intensities``
    assigns one value in [0, 1] to each annulus, innermost disk first and
    the background beyond the last radius last (``len(radii) + 1`` values).
    ``center`` defaults to the geometric center of the grid.
    """

    size: tuple = (512, 512)
    center: tuple | None = None
    radii: tuple = DEFAULT_RADII
    intensities: tuple = DEFAULT_INTENSITIES

    def __post_init__(self):
        m, n = self.size
        if int(m) != m or int(n) != n or m < 1 or n < 1:
            raise ValueError(f"size must be positive integers, got {self.size}")
        radii = tuple(float(r) for r in self.radii)
        if len(radii) == 0:
            raise ValueError("at least one radius is required")
        if any(r <= 0 for r in radii):
            raise ValueError(f"radii must be positive, got {radii}")
        if any(radii[k] >= radii[k + 1] for k in range(len(radii) - 1)):
            raise ValueError(f"radii must be strictly ascending, got {radii}")
        intens = tuple(float(v) for v in self.intensities)
        if len(intens) != len(radii) + 1:
            raise ValueError(
                f"need {len(radii) + 1} intensities (annuli + background), got {len(intens)}"
            )
        if any(v < 0.0 or v > 1.0 for v in intens):
            raise ValueError(f"intensities must lie in [0, 1], got {intens}")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "intensities", intens)

    @classmethod
    def default(cls, size=(512, 512)) -> "RingSpec":
        """Canonical spec, radii scaled proportionally from the 512x512 geometry."""
        if np.isscalar(size):
            size = (int(size), int(size))
        m, n = int(size[0]), int(size[1])
        scale = min(m, n) / 512.0
        return cls(size=(m, n), radii=tuple(r * scale for r in DEFAULT_RADII))


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean Gaussian noise of the given variance from the seeded generator."""

    variance: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")
        if int(self.seed) != self.seed:
            raise ValueError(f"seed must be an integer, got {self.seed}")


def make_rings(spec: RingSpec) -> NDArray[np.float64]:
    """Render the piecewise-constant concentric-rings image of ``spec``.

    Each pixel takes the intensity of the annulus containing its distance
    to the center (a circle boundary belongs to the inner annulus).
    """
    m, n = int(spec.size[0]), int(spec.size[1])
    if spec.center is None:
        ci, cj = (m - 1) / 2.0, (n - 1) / 2.0
    else:
        ci, cj = float(spec.center[0]), float(spec.center[1])
    ii = np.arange(m, dtype=np.float64)[:, None] - ci
    jj = np.arange(n, dtype=np.float64)[None, :] - cj
    dist = np.sqrt(ii * ii + jj * jj)
    idx = np.searchsorted(np.asarray(spec.radii), dist, side="left")
    return np.asarray(spec.intensities, dtype=np.float64)[idx]


def _splitmix64(counters: NDArray[np.uint64], seed: int) -> NDArray[np.uint64]:
    seed64 = np.uint64(seed & _MASK)
    with np.errstate(over="ignore"):
        z = seed64 + (counters + np.uint64(1)) * _GOLDEN
        z ^= z >> np.uint64(30)
        z *= _MIX1
        z ^= z >> np.uint64(27)
        z *= _MIX2
        z ^= z >> np.uint64(31)
    return z


def gaussian_field(shape, seed: int) -> NDArray[np.float64]:
    """Standard-normal samples on a grid from the documented counter scheme."""
    m, n = int(shape[0]), int(shape[1])
    count = m * n
    base = np.uint64(2) * np.arange(count, dtype=np.uint64)
    q1 = ((_splitmix64(base, seed) >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
    q2 = ((_splitmix64(base + np.uint64(1), seed) >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
    z = np.sqrt(-2.0 * np.log(q1)) * np.cos(2.0 * np.pi * q2)
    return z.reshape(m, n)


def add_gaussian_noise(u, spec: NoiseSpec) -> NDArray[np.float64]:
    """Return ``u`` plus seeded Gaussian noise of ``spec.variance``.

    The output is intentionally not clamped to [0, 1]; solvers and metrics
    consume the raw noisy values.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {u.shape}")
    if spec.variance == 0.0:
        return u.copy()
    sigma = float(np.sqrt(spec.variance))
    return u + sigma * gaussian_field(u.shape, spec.seed)
