"""Periodic torus grids and Fourier pseudo-spectral operators.

Fields are plain float64 arrays of shape (n, n) indexed as f[i, j] with
x1 = i*L1/n, x2 = j*L2/n.  All derivative operators act through the FFT,
so they are exact on resolved modes and every field is implicitly the
trigonometric interpolant of its grid values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TorusGrid:
    """Uniform n x n grid on the torus [0,L1) x [0,L2)."""

    n: int
    lengths: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid size must be >= 16, got {self.n}")
        if min(self.lengths) <= 0:
            raise ValueError(f"side lengths must be positive, got {self.lengths}")

    @property
    def area(self) -> float:
        return self.lengths[0] * self.lengths[1]

    @property
    def spacing(self) -> tuple[float, float]:
        return (self.lengths[0] / self.n, self.lengths[1] / self.n)

    @property
    def cell_area(self) -> float:
        h1, h2 = self.spacing
        return h1 * h2

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid coordinate arrays x1, x2 of shape (n, n)."""
        x1 = np.arange(self.n) * self.spacing[0]
        x2 = np.arange(self.n) * self.spacing[1]
        return np.meshgrid(x1, x2, indexing="ij")

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Angular wavenumber meshes k1, k2 (shape (n, n))."""
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing[0])
        k2 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing[1])
        return np.meshgrid(k1, k2, indexing="ij")

    def check_field(self, f: np.ndarray, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n, self.n):
            raise ValueError(
                f"{name} has shape {f.shape}, expected {(self.n, self.n)}"
            )
        return f

    # -- spectral operators -------------------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fft2(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(fh).real

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Flat Laplacian via FFT."""
        k1, k2 = self.wavenumbers()
        return self.ifft(-(k1**2 + k2**2) * self.fft(f))

    def grad(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k1, k2 = self.wavenumbers()
        fh = self.fft(f)
        d1, d2 = 1j * k1 * fh, 1j * k2 * fh
        if self.n % 2 == 0:
            # derivative of the Nyquist cosine vanishes at the nodes
            m = self.n // 2
            d1[m, :] = 0.0
            d2[:, m] = 0.0
        return self.ifft(d1), self.ifft(d2)

    def inverse_laplacian(self, f: np.ndarray) -> np.ndarray:
        """Solve lap(u) = f with zero-mean data and zero-mean solution."""
        k1, k2 = self.wavenumbers()
        k2sum = k1**2 + k2**2
        fh = self.fft(f)
        fh[0, 0] = 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            uh = np.where(k2sum > 0, -fh / k2sum, 0.0)
        return self.ifft(uh)

    def integrate(self, f: np.ndarray) -> float:
        """Trapezoidal (= spectral for periodic data) integral over the torus."""
        return float(np.sum(f)) * self.cell_area

    def mean(self, f: np.ndarray) -> float:
        return float(np.mean(f))

    # -- pointwise evaluation of the trigonometric interpolant --------------

    def eval_at(self, f: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Evaluate the Fourier interpolant of f at arbitrary points.

        pts has shape (..., 2); cost is O(n^2) per point, intended for
        peak-level diagnostics, not bulk resampling.
        """
        return self._eval_spectrum(self.fft(f), pts)

    def eval_grad_at(self, f: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Gradient of the interpolant at points, shape (..., 2)."""
        k1, k2 = self.wavenumbers()
        fh = self.fft(f)
        d1, d2 = 1j * k1 * fh, 1j * k2 * fh
        if self.n % 2 == 0:
            m = self.n // 2
            d1[m, :] = 0.0
            d2[:, m] = 0.0
        g1 = self._eval_spectrum(d1, pts)
        g2 = self._eval_spectrum(d2, pts)
        return np.stack([g1, g2], axis=-1)

    def _eval_spectrum(self, fh: np.ndarray, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, 2)
        # real-mode symmetrization: evaluate sum fh_k e^{i k.x} / n^2
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing[0])
        k2 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing[1])
        # Nyquist mode of an even-length FFT must be treated as a cosine.
        e1 = np.exp(1j * np.outer(flat[:, 0], k1))
        e2 = np.exp(1j * np.outer(flat[:, 1], k2))
        if self.n % 2 == 0:
            m = self.n // 2
            e1[:, m] = np.cos(k1[m] * flat[:, 0])
            e2[:, m] = np.cos(k2[m] * flat[:, 1])
        vals = np.einsum("pk,kl,pl->p", e1, fh, e2) / self.n**2
        return vals.real.reshape(shape)

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        """Map points into the fundamental cell."""
        pts = np.asarray(pts, dtype=float)
        return np.mod(pts, np.asarray(self.lengths))

    def min_image(self, d: np.ndarray) -> np.ndarray:
        """Minimal-image displacement for vectors d (shape (..., 2))."""
        d = np.asarray(d, dtype=float)
        L = np.asarray(self.lengths)
        return d - L * np.round(d / L)


def upsampled_max(grid: TorusGrid, f: np.ndarray, center: np.ndarray,
                  radius: float, refine: int = 4) -> tuple[np.ndarray, float]:
    """Locate the max of the interpolant of f near center within radius.

    Coarse grid scan followed by quadratic refinement on an upsampled
    local patch; returns (location, value).
    """
    m = max(8, int(np.ceil(2 * radius / min(grid.spacing) * refine)))
    t = np.linspace(-radius, radius, m)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    pts = np.stack([center[0] + xx, center[1] + yy], axis=-1)
    vals = grid.eval_at(f, pts.reshape(-1, 2)).reshape(m, m)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    loc = np.array([center[0] + t[i], center[1] + t[j]])
    # quadratic polish with a tiny centered stencil
    h = t[1] - t[0]
    for _ in range(2):
        sten = np.array([[loc + [di * h, dj * h] for dj in (-1, 0, 1)]
                         for di in (-1, 0, 1)]).reshape(-1, 2)
        v = grid.eval_at(f, sten).reshape(3, 3)
        d1 = (v[2, 1] - v[0, 1]) / (2 * h)
        d2 = (v[1, 2] - v[1, 0]) / (2 * h)
        d11 = (v[2, 1] - 2 * v[1, 1] + v[0, 1]) / h**2
        d22 = (v[1, 2] - 2 * v[1, 1] + v[1, 0]) / h**2
        d12 = (v[2, 2] - v[2, 0] - v[0, 2] + v[0, 0]) / (4 * h**2)
        H = np.array([[d11, d12], [d12, d22]])
        gvec = np.array([d1, d2])
        det = np.linalg.det(H)
        if abs(det) < 1e-300:
            break
        step = -np.linalg.solve(H, gvec)
        nrm = np.hypot(*step)
        if nrm > h:
            step *= h / nrm
        loc = loc + step
        h = max(h / 4, 1e-12)
    val = float(grid.eval_at(f, loc[None, :])[0])
    return loc, val
