"""Parameter and state containers, the elastica energy, and quality metrics.

The energy monitored here is the discretized curvature-weighted total
variation plus a quadratic fidelity term,

    E(u) = sum (a + b * kappa^2) * |grad u|  +  (lam / 2) * sum (u - f)^2,

where ``kappa = div(grad u / sqrt(|grad u|^2 + epsilon))`` is the
regularized curvature of the level lines, using the same smoothed
normalization as the solvers. With ``b = 0`` this reduces exactly to the
classic TV (ROF) energy; that identity is load-bearing for the consistency
experiments and is covered by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .grid import div_backward, grad_forward, magnitude, regularized_magnitude

__all__ = [
    "SolverParams",
    "SolverState",
    "IterationTrace",
    "elastica_energy",
    "psnr",
    "nrmse",
    "nmad",
    "relative_residual",
    "norm_n",
]


@dataclass(frozen=True)
class SolverParams:
    """Scalar weights and step sizes shared by all solvers.

    Attributes
    ----------
    a : float
        Total-variation weight, >= 0.
    b : float
        Curvature weight, >= 0. ``b = 0`` turns the model into plain TV.
    lam : float
        Fidelity weight, > 0.
    r1, r2, r3 : float
        Augmented-Lagrangian penalty weights for the direction, gradient
        and divergence constraints, > 0.
    gamma : float
        Proximal weight of the direction-field update, >= 0.
    delta1, delta2 : float
        Linearization step sizes of the image and direction updates, > 0.
    epsilon : float
        Magnitude regularization: every ``|p|`` appearing in a denominator
        is replaced by ``|p| + epsilon``. Default 1e-4.
    tol : float
        Stopping threshold on the relative residual between iterates.
    max_iter : int
        Iteration cap, >= 0. Zero means "do not iterate at all".
    """

    a: float
    b: float
    lam: float
    r1: float
    r2: float
    r3: float
    gamma: float
    delta1: float
    delta2: float
    epsilon: float = 1e-4
    tol: float = 9e-5
    max_iter: int = 10000

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if self.b < 0:
            raise ValueError(f"b must be >= 0, got {self.b}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        for name in ("r1", "r2", "r3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        for name in ("delta1", "delta2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 0:
            raise ValueError(f"max_iter must be a non-negative integer, got {self.max_iter}")


@dataclass
class SolverState:
    """Full iterate of the splitting solvers.

    ``u`` is the image, ``p`` the split gradient, ``n`` the direction field,
    ``h`` the split divergence of ``n``; ``lam1``/``lam2``/``lam3`` are the
    multipliers of the three constraints. ``iter`` counts completed steps.
    """

    u: NDArray[np.float64]
    p: NDArray[np.float64]
    n: NDArray[np.float64]
    h: NDArray[np.float64]
    lam1: NDArray[np.float64]
    lam2: NDArray[np.float64]
    lam3: NDArray[np.float64]
    iter: int = 0

    @classmethod
    def initial(cls, f) -> "SolverState":
        """Starting iterate: ``u`` equals the observed image, all else zero."""
        f = np.asarray(f, dtype=np.float64)
        if f.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {f.shape}")
        shape = f.shape
        return cls(
            u=f.copy(),
            p=np.zeros((2,) + shape),
            n=np.zeros((2,) + shape),
            h=np.zeros(shape),
            lam1=np.zeros((2,) + shape),
            lam2=np.zeros((2,) + shape),
            lam3=np.zeros(shape),
            iter=0,
        )

    @classmethod
    def warm_directions(cls, f, epsilon: float) -> "SolverState":
        """Starting iterate with the direction field seeded from ``grad f``.

        ``u = f``, ``p`` and all multipliers zero (so the image/gradient
        cycle starts exactly like :meth:`initial`), but ``n`` is the
        normalized gradient of the observed image and ``h`` its divergence.
        For a constant image this degenerates to the all-zero start. Used by
        the relaxed-constraint baseline, whose direction field is otherwise
        never constrained where ``p`` vanishes.
        """
        f = np.asarray(f, dtype=np.float64)
        state = cls.initial(f)
        g = grad_forward(f)
        state.n = g / regularized_magnitude(g, epsilon)
        state.h = div_backward(state.n)
        return state

    def arrays(self):
        """All grids of the iterate, in a fixed order."""
        return (self.u, self.p, self.n, self.h, self.lam1, self.lam2, self.lam3)


@dataclass
class IterationTrace:
    """Per-iteration convergence record of a solver run.

    Parallel lists, one entry per executed iteration: the iteration number,
    the monitored energy, PSNR against the reference (NaN when no reference
    was supplied, ``inf`` for a perfect match), the relative residual
    between consecutive iterates, and the mean magnitude of the direction
    field. ``duration`` is the wall-clock time of the whole run (seconds),
    kept on the object but never serialized.
    """

    iters: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    psnr: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    norm_n: list = field(default_factory=list)
    duration: float = 0.0

    COLUMNS = ("iter", "energy", "psnr", "residual", "norm_n")

    def append(self, it: int, energy: float, psnr: float, residual: float, norm_n: float):
        self.iters.append(int(it))
        self.energy.append(float(energy))
        self.psnr.append(float(psnr))
        self.residual.append(float(residual))
        self.norm_n.append(float(norm_n))

    def __len__(self) -> int:
        return len(self.iters)

    def rows(self):
        """Yield one ``(iter, energy, psnr, residual, norm_n)`` tuple per record."""
        return zip(self.iters, self.energy, self.psnr, self.residual, self.norm_n)


def _check_same_shape(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def elastica_energy(u, f, params: SolverParams) -> float:
    """Curvature-weighted TV energy plus quadratic fidelity of ``u`` given ``f``.

    The curvature is computed from the same ``epsilon``-regularized
    normalization the solvers use, so diagnostics and solver share one
    definition; the TV factor ``|grad u|`` itself is unregularized.
    """
    u, f = _check_same_shape(u, f)
    g = grad_forward(u)
    gmag = magnitude(g)
    kappa = div_backward(g / regularized_magnitude(g, params.epsilon))
    reg = np.sum((params.a + params.b * kappa * kappa) * gmag)
    fid = 0.5 * params.lam * np.sum((u - f) ** 2)
    return float(reg + fid)


def psnr(reference, test) -> float:
    """Peak signal-to-noise ratio in dB, with peak intensity fixed at 1.

    Both grids are expected on the [0, 1] intensity scale (values slightly
    outside, e.g. unclamped noise, are fine). Identical inputs yield the
    distinguished value ``inf`` rather than raising.
    """
    reference, test = _check_same_shape(reference, test)
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0.0:
        return math.inf
    return float(10.0 * np.log10(1.0 / mse))


def nrmse(reference, test) -> float:
    """Root of the squared-error sum over the squared deviation of the reference.

    ``sqrt(sum((ref - test)^2) / sum((ref - mean(ref))^2))``. A constant
    reference has no deviation to normalize by and raises ``ValueError``.
    """
    reference, test = _check_same_shape(reference, test)
    num = float(np.sum((reference - test) ** 2))
    den = float(np.sum((reference - np.mean(reference)) ** 2))
    if den == 0.0:
        raise ValueError("reference grid is constant; NRMSE is undefined")
    return math.sqrt(num / den)


def nmad(reference, test) -> float:
    """Normalized mean absolute difference ``sum|ref - test| / sum|ref|``."""
    reference, test = _check_same_shape(reference, test)
    den = float(np.sum(np.abs(reference)))
    if den == 0.0:
        raise ValueError("reference grid is identically zero; NMAD is undefined")
    return float(np.sum(np.abs(reference - test))) / den


def relative_residual(u_curr, u_prev) -> float:
    """``||u_curr - u_prev||_2 / ||u_prev||_2`` over all pixels."""
    u_curr, u_prev = _check_same_shape(u_curr, u_prev)
    den = math.sqrt(float(np.sum(u_prev * u_prev)))
    if den == 0.0:
        raise ValueError("previous iterate has zero norm; relative residual is undefined")
    diff = u_curr - u_prev
    return math.sqrt(float(np.sum(diff * diff))) / den


def norm_n(n) -> float:
    """Mean over all pixels of the per-pixel Euclidean length of ``n``."""
    return float(np.mean(magnitude(n)))
