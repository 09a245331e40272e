"""Reproducing kernels of the model spaces and their normalized versions.

Conventions fixed here once:
  Paley-Wiener, band b (default pi):  K(x, y) = sin(b (x - y)) / (pi (x - y)),
      so the diagonal is b / pi and equals 1 at the default band.
  Fock (one complex variable, points in R^2 ~ C):  K(z, w) = exp(pi z conj(w)),
      giving |<k_z, k_w>|^2 = exp(-pi |z - w|^2); the matching normalized
      index measure is Lebesgue on C.
  Gabor-Gaussian in n variables (phase-space points (p, q) in R^{2n}, window
      2^{n/4} exp(-pi |x|^2)):  the family is already normalized and
      <g_l, g_m> = exp(i pi (q - q') . (p + p')) exp(-pi (|p - p'|^2 + |q - q'|^2)/2),
      a closed form derived from the Gaussian integral and regression-tested
      against direct quadrature of the time-frequency shift inner product.

kernel_eval(K, x, y) returns K(x, y) = <K_y, K_x>; Hermitian symmetry
K(x, y) = conj(K(y, x)) is structural for every variant.

Cross evaluations of normalized kernels are computed through exponents with
nonpositive real part, so they stay finite where the raw Fock kernel would
overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .space import Ball, as_point

__all__ = [
    "PaleyWienerKernel",
    "FockKernel",
    "GaborGaussianKernel",
    "TabulatedKernel",
    "NormalizedKernelValue",
    "kernel_eval",
    "normalized_inner",
    "diagonal_bounds",
    "kernel_from_config",
]


@dataclass(frozen=True)
class NormalizedKernelValue:
    """Value and squared modulus of <k_x, k_y> for normalized kernels."""

    value: complex
    modulus_sq: float


def _rows(points, dim: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != dim:
        raise ValueError(f"points must have dimension {dim}, got {pts.shape[1]}")
    return pts


class PaleyWienerKernel:
    """Sinc kernel of the band-limited space on R."""

    def __init__(self, band: float = math.pi):
        if band <= 0:
            raise ValueError("band must be positive")
        self.band = float(band)

    dim = 1

    @property
    def mode_density(self) -> float:
        # local dimension per unit length of the index line
        return self.band / math.pi

    def diagonal(self, x) -> np.ndarray:
        pts = _rows(x, self.dim)
        return np.full(len(pts), self.band / math.pi)

    def cross(self, x, y) -> np.ndarray:
        """Raw kernel matrix K(x_i, y_j), shape (len(x), len(y))."""
        t = _rows(x, 1)[:, 0][:, None] - _rows(y, 1)[:, 0][None, :]
        return np.asarray(np.sinc(self.band * t / math.pi), dtype=complex) * (self.band / math.pi)

    def normalized_cross(self, x, y) -> np.ndarray:
        t = _rows(x, 1)[:, 0][:, None] - _rows(y, 1)[:, 0][None, :]
        return np.asarray(np.sinc(self.band * t / math.pi), dtype=complex)

    def against_normalized(self, x, y) -> np.ndarray:
        """K(x_i, y) / sqrt(K(x_i, x_i)) for a single second argument y."""
        t = _rows(x, 1)[:, 0] - float(as_point(y)[0])
        return np.asarray(np.sinc(self.band * t / math.pi), dtype=complex) * math.sqrt(self.band / math.pi)

    def tail_cutoff(self, eps: float) -> float:
        # sinc^2 decays like (pi t)^-2 only; no useful Gaussian-style cutoff
        return math.inf

    def mod2_tail_integral(self, gap: float) -> float:
        """Upper estimate of the squared-modulus mass beyond distance gap."""
        if gap <= 0:
            return math.inf
        return 2.0 / (self.band * self.band * gap)


class FockKernel:
    """Bargmann-Fock kernel exp(pi z conj(w)) in one complex variable."""

    dim = 2
    mode_density = 1.0

    def diagonal(self, x) -> np.ndarray:
        pts = _rows(x, 2)
        return np.exp(math.pi * np.einsum("ij,ij->i", pts, pts))

    @staticmethod
    def _as_complex(pts) -> np.ndarray:
        return pts[:, 0] + 1j * pts[:, 1]

    def cross(self, x, y) -> np.ndarray:
        z = self._as_complex(_rows(x, 2))[:, None]
        w = self._as_complex(_rows(y, 2))[None, :]
        return np.exp(math.pi * z * np.conj(w))

    def normalized_cross(self, x, y) -> np.ndarray:
        z = self._as_complex(_rows(x, 2))[:, None]
        w = self._as_complex(_rows(y, 2))[None, :]
        expo = math.pi * (z * np.conj(w) - 0.5 * np.abs(z) ** 2 - 0.5 * np.abs(w) ** 2)
        return np.exp(expo)

    def against_normalized(self, x, y) -> np.ndarray:
        """K(x_i, y) / sqrt(K(x_i, x_i)) for a single second argument y."""
        z = self._as_complex(_rows(x, 2))
        w = complex(*as_point(y))
        return np.exp(math.pi * (z * np.conj(w) - 0.5 * np.abs(z) ** 2))

    def tail_cutoff(self, eps: float) -> float:
        return math.sqrt(max(-math.log(eps), 1.0) / math.pi)

    def mod2_tail_integral(self, gap: float) -> float:
        return math.exp(-math.pi * gap * gap)


class GaborGaussianKernel:
    """Coherent-state family of time-frequency shifts of the Gaussian window."""

    def __init__(self, n: int = 1):
        if n < 1:
            raise ValueError("number of variables must be >= 1")
        self.n = int(n)

    @property
    def dim(self) -> int:
        return 2 * self.n

    mode_density = 1.0

    def diagonal(self, x) -> np.ndarray:
        pts = _rows(x, self.dim)
        return np.ones(len(pts))

    def cross(self, x, y) -> np.ndarray:
        lam = _rows(x, self.dim)
        mu = _rows(y, self.dim)
        p, q = lam[:, : self.n][:, None, :], lam[:, self.n :][:, None, :]
        pp, qp = mu[:, : self.n][None, :, :], mu[:, self.n :][None, :, :]
        dp2 = np.sum((p - pp) ** 2, axis=2)
        dq2 = np.sum((q - qp) ** 2, axis=2)
        phase = math.pi * np.sum((q - qp) * (p + pp), axis=2)
        return np.exp(-0.5 * math.pi * (dp2 + dq2) + 1j * phase)

    normalized_cross = cross

    def against_normalized(self, x, y) -> np.ndarray:
        return self.cross(x, np.atleast_2d(as_point(y)))[:, 0]

    def tail_cutoff(self, eps: float) -> float:
        return math.sqrt(max(-math.log(eps), 1.0) / math.pi)

    def mod2_tail_integral(self, gap: float) -> float:
        return (1.0 + gap) ** (self.dim - 2) * math.exp(-math.pi * gap * gap)


class TabulatedKernel:
    """Kernel given by a user callback K(x, y) -> complex on single points.

    The callback must supply its own (positive) diagonal; nothing is
    interpolated.
    """

    def __init__(self, fn, dim: int, mode_density: float | None = None):
        self.fn = fn
        self.dim = int(dim)
        self.mode_density = mode_density

    def diagonal(self, x) -> np.ndarray:
        pts = _rows(x, self.dim)
        return np.array([complex(self.fn(p, p)).real for p in pts])

    def cross(self, x, y) -> np.ndarray:
        xp = _rows(x, self.dim)
        yp = _rows(y, self.dim)
        out = np.empty((len(xp), len(yp)), dtype=complex)
        for i, p in enumerate(xp):
            for j, q in enumerate(yp):
                out[i, j] = complex(self.fn(p, q))
        return out

    def normalized_cross(self, x, y) -> np.ndarray:
        kxy = self.cross(x, y)
        dx = self.diagonal(x)
        dy = self.diagonal(y)
        if np.any(dx <= 0) or np.any(dy <= 0):
            raise ValueError("kernel degenerate at point: nonpositive diagonal")
        return kxy / np.sqrt(dx)[:, None] / np.sqrt(dy)[None, :]

    def against_normalized(self, x, y) -> np.ndarray:
        xp = _rows(x, self.dim)
        dx = self.diagonal(xp)
        if np.any(dx <= 0):
            raise ValueError("kernel degenerate at point: nonpositive diagonal")
        return self.cross(xp, np.atleast_2d(as_point(y)))[:, 0] / np.sqrt(dx)

    def tail_cutoff(self, eps: float) -> float:
        return math.inf

    def mod2_tail_integral(self, gap: float) -> float:
        return math.inf


def kernel_eval(kernel, x, y) -> complex:
    """K(x, y) = <K_y, K_x> for single points."""
    return complex(kernel.cross(np.atleast_2d(as_point(x)), np.atleast_2d(as_point(y)))[0, 0])


def normalized_inner(kernel, x, y) -> NormalizedKernelValue:
    """<k_x, k_y> = K(x, y) / sqrt(K(x,x) K(y,y)) with its squared modulus."""
    xp = np.atleast_2d(as_point(x))
    yp = np.atleast_2d(as_point(y))
    dx = float(kernel.diagonal(xp)[0])
    dy = float(kernel.diagonal(yp)[0])
    if dx <= 0 or dy <= 0:
        raise ValueError("kernel degenerate at point: nonpositive diagonal")
    if isinstance(kernel, (FockKernel, GaborGaussianKernel, PaleyWienerKernel)):
        val = complex(kernel.normalized_cross(xp, yp)[0, 0])
    else:
        val = complex(kernel.cross(xp, yp)[0, 0]) / math.sqrt(dx * dy)
    return NormalizedKernelValue(value=val, modulus_sq=abs(val) ** 2)


def normalized_mod2(kernel, x, y) -> np.ndarray:
    """|<k_x_i, k_y_j>|^2 as an (len(x), len(y)) array (stable forms)."""
    return np.abs(kernel.normalized_cross(x, y)) ** 2


def diagonal_bounds(kernel, region: Ball, sample_grid_spacing: float) -> tuple[float, float]:
    """(min, max) of K(x, x) over a grid in the region; a diagnostic, not a proof."""
    if sample_grid_spacing <= 0:
        raise ValueError("grid spacing must be positive")
    d = region.dim
    if d != kernel.dim:
        raise ValueError("region dimension does not match the kernel")
    axes = []
    for i in range(d):
        lo = region.center[i] - region.radius
        hi = region.center[i] + region.radius
        n = int(math.floor((hi - lo) / sample_grid_spacing)) + 1
        axes.append(lo + sample_grid_spacing * np.arange(n))
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = pts[region.contains(pts)]
    if len(pts) == 0:
        raise ValueError("empty sample grid in region")
    diag = np.real(kernel.diagonal(pts))
    return float(np.min(diag)), float(np.max(diag))


_KERNEL_NAMES = {
    "paley-wiener": lambda params: PaleyWienerKernel(band=float(params.get("band", math.pi))),
    "fock": lambda params: FockKernel(),
    "gabor-gaussian": lambda params: GaborGaussianKernel(n=int(params.get("n", 1))),
}


def kernel_from_config(cfg: dict):
    """Build a kernel from {"kernel": name, "params": {...}}."""
    name = cfg.get("kernel")
    if name not in _KERNEL_NAMES:
        raise ValueError(f"unknown kernel {name!r}; expected one of {sorted(_KERNEL_NAMES)}")
    return _KERNEL_NAMES[name](cfg.get("params", {}))
