"""Conformally flat torus geometry: metric, Green's function, Robin function.

The metric is g = e^phi |dx|^2 on [0,L1) x [0,L2), with the conformal
factor rescaled by a constant so the total volume is exactly 1.  The
Green's function of -lap_g splits as

    G(x, y) = G0(x - y) + C(x) + C(y) + c0

where G0 is the flat-torus Green's function (unit point charge against a
uniform background, computed to machine precision by Ewald summation)
and C is the smooth spectral solution of  -lap C = 1/A - e^phi.  The
log singularity therefore never touches the grid; the regular part beta
and all first-argument gradients are analytic in the flat piece and
spectral in the correction.

A second, independent closed form for G0 through the Jacobi theta
function theta1 is provided as a cross-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import exp1

from .grid import TorusGrid


@dataclass(frozen=True)
class GreensEvaluation:
    """G, its regular part, and their first-argument gradients at (x, y)."""

    g_value: float
    beta_value: float
    grad1_g: np.ndarray
    grad1_beta: np.ndarray


class ConformalMetric:
    """Metric g = e^phi |dx|^2 with vol(M) = 1 after normalization.

    phi0 is the user conformal exponent; ``normalize=True`` adds the
    constant that makes the volume exactly 1 (recomputed on every
    construction).  Objects are immutable after __init__ and safe to
    share between threads.
    """

    def __init__(self, grid: TorusGrid, phi0: np.ndarray | None = None,
                 normalize: bool = True):
        self.grid = grid
        if phi0 is None:
            phi0 = np.zeros((grid.n, grid.n))
        phi0 = grid.check_field(phi0, "phi0")
        raw_vol = grid.integrate(np.exp(phi0))
        self.log_normalization = -np.log(raw_vol) if normalize else 0.0
        self.phi = phi0 + self.log_normalization
        self.weight = np.exp(self.phi)          # dV_g density
        self.volume = grid.integrate(self.weight)
        self.is_flat = bool(np.max(np.abs(phi0 - phi0.flat[0])) == 0.0)
        self._green = None

    # -- measure -------------------------------------------------------------

    def integrate(self, f: np.ndarray) -> float:
        """Integral of f against dV_g."""
        return self.grid.integrate(f * self.weight)

    def mean_g(self, f: np.ndarray) -> float:
        return self.integrate(f) / self.volume

    def phi_at(self, pts: np.ndarray) -> np.ndarray:
        return self.grid.eval_at(self.phi, pts)

    # -- operators -----------------------------------------------------------

    def laplace_beltrami(self, f: np.ndarray) -> np.ndarray:
        """lap_g f = e^{-phi} lap f (conformal covariance)."""
        f = self.grid.check_field(f)
        return np.exp(-self.phi) * self.grid.laplacian(f)

    def gauss_curvature_field(self) -> np.ndarray:
        """K = -1/2 e^{-phi} lap phi on the grid."""
        return -0.5 * np.exp(-self.phi) * self.grid.laplacian(self.phi)

    def gauss_curvature(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)[None, :]
        lap_phi = float(self.grid.eval_at(self.grid.laplacian(self.phi), x)[0])
        return -0.5 * float(np.exp(-self.grid.eval_at(self.phi, x)[0])) * lap_phi

    # -- Green's function ----------------------------------------------------

    def green(self) -> "GreenFunction":
        if self._green is None:
            self._green = GreenFunction(self)
        return self._green


def laplace_beltrami(f: np.ndarray, m: ConformalMetric) -> np.ndarray:
    return m.laplace_beltrami(f)


def gauss_curvature(m: ConformalMetric, x) -> float:
    return m.gauss_curvature(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Flat-torus Green's function, Ewald route (production)
# ---------------------------------------------------------------------------

class EwaldGreen:
    """G0 for -lap G0 = delta - 1/A on [0,L1) x [0,L2), zero mean.

    Split parameter eta balances a Gaussian-damped reciprocal sum and an
    exp1 lattice sum; both tails are < 1e-15 with the chosen cutoffs.
    """

    def __init__(self, lengths: tuple[float, float], eta: float | None = None):
        self.L1, self.L2 = float(lengths[0]), float(lengths[1])
        self.area = self.L1 * self.L2
        self.eta = eta if eta is not None else min(self.L1, self.L2) / 5.0
        # reciprocal cutoff: exp(-eta^2 k^2) <= 1e-17  =>  k >= 6.3/eta
        kmax = 6.3 / self.eta
        m1 = int(np.ceil(kmax * self.L1 / (2 * np.pi)))
        m2 = int(np.ceil(kmax * self.L2 / (2 * np.pi)))
        ii = np.arange(-m1, m1 + 1)
        jj = np.arange(-m2, m2 + 1)
        K1, K2 = np.meshgrid(2 * np.pi * ii / self.L1, 2 * np.pi * jj / self.L2,
                             indexing="ij")
        ksq = K1**2 + K2**2
        mask = ksq > 0
        self._k1 = K1[mask]
        self._k2 = K2[mask]
        self._kcoef = np.exp(-self.eta**2 * ksq[mask]) / (self.area * ksq[mask])
        # real-space cutoff: E1(r^2/4 eta^2) <= 1e-17  =>  r >= 6.5*eta
        rmax = 6.5 * self.eta
        n1 = int(np.ceil(rmax / self.L1)) + 1
        n2 = int(np.ceil(rmax / self.L2)) + 1
        R1, R2 = np.meshgrid(np.arange(-n1, n1 + 1) * self.L1,
                             np.arange(-n2, n2 + 1) * self.L2, indexing="ij")
        self._R = np.stack([R1.ravel(), R2.ravel()], axis=-1)

    def _parts(self, d: np.ndarray):
        d = np.atleast_2d(d)
        phase = np.exp(1j * (np.outer(d[:, 0], self._k1)
                             + np.outer(d[:, 1], self._k2)))
        recip = phase.real @ self._kcoef
        dr = d[:, None, :] - self._R[None, :, :]
        r2 = np.sum(dr * dr, axis=-1)
        return d, recip, dr, r2

    def value(self, d: np.ndarray) -> np.ndarray:
        """G0 at displacements d (shape (...,2))."""
        d = np.asarray(d, dtype=float)
        shape = d.shape[:-1]
        d, recip, _, r2 = self._parts(d.reshape(-1, 2))
        z = r2 / (4 * self.eta**2)
        short = np.sum(np.where(z < 37, exp1(np.maximum(z, 1e-300)), 0.0),
                       axis=1) / (4 * np.pi)
        out = recip + short - self.eta**2 / self.area
        return out.reshape(shape)

    def beta(self, d: np.ndarray) -> np.ndarray:
        """Regular part beta = G0 + log|d|/2pi, stable through d = 0."""
        d = np.asarray(d, dtype=float)
        shape = d.shape[:-1]
        dd, recip, dr, r2 = self._parts(d.reshape(-1, 2))
        z = r2 / (4 * self.eta**2)
        # nearest image carries the singularity; E1(z) + log z + gamma is entire
        near = np.argmin(r2, axis=1)
        idx = np.arange(len(dd))
        zn = z[idx, near]
        out = recip - self.eta**2 / self.area
        mask = np.ones_like(z, dtype=bool)
        mask[idx, near] = False
        out += np.sum(np.where(mask & (z < 37),
                               exp1(np.maximum(z, 1e-300)), 0.0),
                      axis=1) / (4 * np.pi)
        out += (_exp1_reg(zn) + np.log(4 * self.eta**2) - np.euler_gamma) \
            / (4 * np.pi)
        return out.reshape(shape)

    def grad(self, d: np.ndarray) -> np.ndarray:
        """grad of G0 with respect to the first argument (i.e. d)."""
        d = np.asarray(d, dtype=float)
        shape = d.shape[:-1]
        dd = d.reshape(-1, 2)
        phase = np.outer(dd[:, 0], self._k1) + np.outer(dd[:, 1], self._k2)
        s = -np.sin(phase)
        g1 = s @ (self._kcoef * self._k1)
        g2 = s @ (self._kcoef * self._k2)
        dr = dd[:, None, :] - self._R[None, :, :]
        r2 = np.sum(dr * dr, axis=-1)
        w = np.exp(-np.minimum(r2 / (4 * self.eta**2), 700)) / np.maximum(r2, 1e-300)
        w[r2 / (4 * self.eta**2) > 37] = 0.0
        gs = -np.sum(dr * w[:, :, None], axis=1) / (2 * np.pi)
        out = np.stack([g1, g2], axis=-1) + gs
        return out.reshape(shape + (2,))

    def grad_beta(self, d: np.ndarray) -> np.ndarray:
        """grad1 of beta; finite at d = 0 (where it vanishes by parity)."""
        d = np.asarray(d, dtype=float)
        shape = d.shape[:-1]
        dd = d.reshape(-1, 2)
        phase = np.outer(dd[:, 0], self._k1) + np.outer(dd[:, 1], self._k2)
        s = -np.sin(phase)
        g1 = s @ (self._kcoef * self._k1)
        g2 = s @ (self._kcoef * self._k2)
        out = np.stack([g1, g2], axis=-1)
        dr = dd[:, None, :] - self._R[None, :, :]
        r2 = np.sum(dr * dr, axis=-1)
        near = np.argmin(r2, axis=1)
        idx = np.arange(len(dd))
        z = r2 / (4 * self.eta**2)
        w = np.exp(-np.minimum(z, 700)) / np.maximum(r2, 1e-300)
        w[z > 37] = 0.0
        # nearest image: (1 - e^{-z})/r^2 * d , smooth as d -> 0
        zn = z[idx, near]
        rn2 = r2[idx, near]
        wn = np.where(rn2 > 1e-280, -np.expm1(-zn) / np.maximum(rn2, 1e-300),
                      1.0 / (4 * self.eta**2))
        w[idx, near] = 0.0
        out += -np.sum(dr * w[:, :, None], axis=1) / (2 * np.pi)
        out += dr[idx, near, :] * wn[:, None] / (2 * np.pi)
        return out.reshape(shape + (2,))


def _exp1_reg(z: np.ndarray) -> np.ndarray:
    """E1(z) + log z + gamma, entire; series for small z, direct otherwise."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1e-6
    zl = z[small]
    out[small] = zl * (1 - zl / 4 * (1 - zl * 2 / 9))
    zb = z[~small]
    out[~small] = np.where(zb < 700, exp1(np.maximum(zb, 1e-300)), 0.0) \
        + np.log(np.maximum(zb, 1e-300)) + np.euler_gamma
    return out


# ---------------------------------------------------------------------------
# Flat-torus Green's function, theta-function route (oracle)
# ---------------------------------------------------------------------------

def theta_green(d: np.ndarray, lengths: tuple[float, float]) -> np.ndarray:
    """Closed-form G0 via Jacobi theta1, zero mean, for cross-checks.

    G0(z) = -log|theta1(pi z / L1 | q)| / 2pi + x2^2/(2A) - M,
    q = exp(-pi L2/L1);  M is the exact torus mean of the first two terms:
    M = -(log prod(1-q^{2n}) + pi L2/(4 L1)) / 2pi + L2 / (6 L1).
    Axes are swapped when L2 < L1 so the q-series converges fast.
    """
    d = np.asarray(d, dtype=float)
    L1, L2 = float(lengths[0]), float(lengths[1])
    if L2 < L1:
        d = d[..., ::-1]
        L1, L2 = L2, L1
    A = L1 * L2
    q = np.exp(-np.pi * L2 / L1)
    x2 = np.mod(d[..., 1], L2)
    v = (np.pi / L1) * (d[..., 0] + 1j * x2)
    log_prod = np.sum(np.log1p(-q ** (2 * np.arange(1, 40))))
    mean = -(log_prod + np.pi * L2 / (4 * L1)) / (2 * np.pi) + L2 / (6 * L1)
    return -_log_abs_theta1(v, q) / (2 * np.pi) + x2**2 / (2 * A) - mean


def _log_abs_theta1(v: np.ndarray, q: float) -> np.ndarray:
    """log|theta1(v, q)| via the product formula, stable for Im v >= 0.

    theta1 = 2 q^{1/4} sin v * prod (1-q^{2n}) (1-q^{2n}e^{2iv}) (1-q^{2n}e^{-2iv});
    the e^{-2iv} factors grow with Im v, so pull out the dominant
    exponential from log|sin v| and keep every factor's modulus < e.
    """
    v = np.asarray(v, dtype=complex)
    b = v.imag
    # log|sin v| = b - log 2 + log|1 - e^{2iv}| with |e^{2iv}| = e^{-2b} <= 1
    log_sin = np.abs(b) - np.log(2.0) + \
        np.log(np.abs(1.0 - np.exp(2j * np.where(b >= 0, v, np.conj(v)))))
    out = np.log(2.0) + 0.25 * np.log(q) + log_sin
    for n in range(1, 40):
        qn = q ** (2 * n)
        if qn < 1e-18:
            break
        out += np.log1p(-qn)
        ev = np.exp(2j * np.where(b >= 0, v, np.conj(v)))
        out += np.log(np.abs(1.0 - qn * ev))
        # |e^{-2iv}| = e^{2b}: combine with q^{2n} (bounded since b < pi L2/L1)
        out += np.log(np.abs(1.0 - qn * np.exp(-2j * np.where(b >= 0, v, np.conj(v)))))
    return out.real


# ---------------------------------------------------------------------------
# Metric Green's function
# ---------------------------------------------------------------------------

class GreenFunction:
    """G(x,y) for -lap_g G = delta_x - 1 on the normalized metric.

    gauge: integral of G(x, .) dV_g = 0 for every x.
    """

    def __init__(self, metric: ConformalMetric):
        if abs(metric.volume - 1.0) > 1e-10:
            raise ValueError("Green's function requires a volume-normalized metric")
        self.metric = metric
        g = metric.grid
        self.flat = EwaldGreen(g.lengths)
        # -lap C = 1/A - e^phi  (zero-mean RHS; C gauged to zero coord. mean)
        rhs = metric.weight - 1.0 / g.area
        self.C = g.inverse_laplacian(rhs)
        self.C -= g.mean(self.C)
        self.c0 = -g.integrate(self.C * metric.weight)
        self._C_spec = g.fft(self.C)
        k1, k2 = g.wavenumbers()
        d1, d2 = 1j * k1 * self._C_spec, 1j * k2 * self._C_spec
        if g.n % 2 == 0:
            m = g.n // 2
            d1[m, :] = 0.0
            d2[:, m] = 0.0
        self._C_grad_spec = (d1, d2)

    def _C_at(self, pts: np.ndarray) -> np.ndarray:
        return self.metric.grid._eval_spectrum(self._C_spec, pts)

    def _C_grad_at(self, pts: np.ndarray) -> np.ndarray:
        g = self.metric.grid
        return np.stack([g._eval_spectrum(self._C_grad_spec[0], pts),
                         g._eval_spectrum(self._C_grad_spec[1], pts)], axis=-1)

    def evaluate(self, x, y) -> GreensEvaluation:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g = self.metric.grid
        d = g.min_image(x - y)
        if np.hypot(*d) < 1e-13:
            raise ValueError("x = y: use robin() for the diagonal")
        cx = float(self._C_at(x[None, :])[0])
        cy = float(self._C_at(y[None, :])[0])
        gcx = self._C_grad_at(x[None, :])[0]
        gval = float(self.flat.value(d)) + cx + cy + self.c0
        bval = float(self.flat.beta(d)) + cx + cy + self.c0
        return GreensEvaluation(
            g_value=gval,
            beta_value=bval,
            grad1_g=self.flat.grad(d) + gcx,
            grad1_beta=self.flat.grad_beta(d) + gcx,
        )

    def value(self, x, y) -> float:
        return self.evaluate(x, y).g_value

    def grad1(self, x, y) -> np.ndarray:
        return self.evaluate(x, y).grad1_g

    def robin(self, x) -> tuple[float, np.ndarray]:
        """beta(x,x) and the gradient of the Robin function x -> beta(x,x).

        The first-argument gradient grad1 beta(x,x) is half the returned
        gradient (symmetry of beta).
        """
        x = np.asarray(x, dtype=float)
        beta0 = float(self.flat.beta(np.zeros(2)))
        cx = float(self._C_at(x[None, :])[0])
        gcx = self._C_grad_at(x[None, :])[0]
        return beta0 + 2 * cx + self.c0, 2 * gcx

    def grad1_beta_diag(self, x) -> np.ndarray:
        """grad1 beta(x, x) as it enters the location equations."""
        return self._C_grad_at(np.asarray(x, dtype=float)[None, :])[0]

    # -- grid-sampled potentials ----------------------------------------------

    def potential_field(self, y, coefficient: float = 1.0) -> np.ndarray:
        """Grid field coefficient * G(., y) via the analytic formula."""
        g = self.metric.grid
        x1, x2 = g.coords()
        pts = np.stack([x1 - y[0], x2 - y[1]], axis=-1)
        d = g.min_image(pts.reshape(-1, 2))
        vals = self.flat.value(d).reshape(g.n, g.n)
        cy = float(self._C_at(np.asarray(y, dtype=float)[None, :])[0])
        return coefficient * (vals + self.C + cy + self.c0)

    def log_distance_factor(self, y, reg: float = 0.0) -> np.ndarray:
        """Grid field exp(-4 pi (G(., y) - beta(y, y))) + reg^2.

        Behaves like |x - y|^2 + reg^2 near y and is smooth and periodic;
        the workhorse for gluing bubble profiles to Green far fields.
        """
        beta_y, _ = self.robin(np.asarray(y, dtype=float))
        G = self.potential_field(np.asarray(y, dtype=float))
        return np.exp(-4 * np.pi * (G - beta_y)) + reg**2

    def discrete_residual(self, x) -> float:
        """Mean-square residual of -lap_g G - (delta_x - 1), discrete route.

        The delta is represented by its truncated Fourier series (the
        spectral discretization contract), so this validates operator,
        gauge, and solver plumbing.
        """
        g = self.metric.grid
        x = np.asarray(x, dtype=float)
        k1, k2 = g.wavenumbers()
        delta_hat = np.exp(-1j * (k1 * x[0] + k2 * x[1])) / g.cell_area
        rhs = g.ifft(delta_hat) - self.metric.weight  # coordinate form
        Gd = g.inverse_laplacian(-rhs)
        # gauge to match: integral G dV_g = 0
        Gd -= self.metric.integrate(Gd)
        resid = -self.metric.laplace_beltrami(Gd) - g.ifft(delta_hat) \
            / np.maximum(self.metric.weight, 1e-300) + 1.0
        return float(np.sqrt(self.metric.integrate(resid**2)))


def green_function(x, y, m: ConformalMetric) -> GreensEvaluation:
    return m.green().evaluate(x, y)


def robin_function(x, m: ConformalMetric) -> tuple[float, np.ndarray]:
    return m.green().robin(x)


def greens_table(m: ConformalMetric, pairs: np.ndarray) -> list[dict]:
    """Rows for the Green's-table CSV export, one per (x, y) pair."""
    gf = m.green()
    rows = []
    for x1, x2, y1, y2 in np.atleast_2d(pairs):
        ev = gf.evaluate((x1, x2), (y1, y2))
        rows.append({
            "x1": x1, "x2": x2, "y1": y1, "y2": y2,
            "G": ev.g_value, "beta": ev.beta_value,
            "dG1": ev.grad1_g[0], "dG2": ev.grad1_g[1],
            "dbeta1": ev.grad1_beta[0], "dbeta2": ev.grad1_beta[1],
        })
    return rows
