"""Entire bubble profiles and the 3-point interpolation matrix.

Two exact families:

  * standard bubble  U = lam - 2 log(1 + e^lam c |x-q|^2),  c = 2h(0)/8,
    solving lap U + 2h e^U = 0 with total mass  int 2h e^U = 8 pi;

  * singular bubble  U = log[ L / (2 h20 (1 + (L/32)|z^2-xi|^2)^2) ],
    solving lap U + 2 h20 |y|^2 e^U = 0 away from 0 with weighted mass
    2 h20 int |y|^2 e^U = 16 pi.

Masses are computed by adaptive polar quadrature with algebraic tail
extrapolation rather than the closed forms, so they double as quadrature
self-tests.  Parameter derivatives of the singular bubble are derived
symbolically from the closed form; finite differences are the
authoritative check on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class StandardBubble:
    """Radial Liouville profile with peak height `height` at `center`."""

    height: float
    center: tuple[float, float] = (0.0, 0.0)
    coeff: float = 0.25          # c = 2 h(0) / 8

    def __post_init__(self):
        if self.coeff <= 0:
            raise ValueError("coeff must be positive")

    @classmethod
    def from_h(cls, height: float, h0: float, center=(0.0, 0.0)) -> "StandardBubble":
        return cls(height=height, center=tuple(center), coeff=2.0 * h0 / 8.0)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = (x[..., 0] - self.center[0]) ** 2 + (x[..., 1] - self.center[1]) ** 2
        return self.height - 2.0 * np.log1p(np.exp(self.height) * self.coeff * r2)

    def radial(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.height - 2.0 * np.log1p(np.exp(self.height) * self.coeff * r**2)


def eval_standard_bubble(b: StandardBubble, x) -> float | np.ndarray:
    out = b(x)
    return float(out) if np.ndim(out) == 0 else out


def standard_bubble_mass(b: StandardBubble, h: float,
                         rtol: float = 1e-10) -> tuple[float, float]:
    """int_{R^2} 2 h e^U by radial quadrature + tail; returns (value, err)."""
    if abs(2.0 * h / 8.0 - b.coeff) > 1e-12 * max(1.0, b.coeff):
        raise ValueError("h inconsistent with the bubble coefficient c = 2h/8")

    def integrand(r):
        return 2.0 * h * np.exp(b.radial(r)) * 2.0 * np.pi * r

    scale = np.exp(-b.height / 2.0) / np.sqrt(b.coeff)
    return _radial_with_tail(integrand, scale, decay_hint=3.0, rtol=rtol)


def standard_bubble_truncated_mass(b: StandardBubble, h: float, R: float) -> float:
    """Mass over |x - q| <= R (closed tail test companion)."""
    def integrand(r):
        return 2.0 * h * np.exp(b.radial(r)) * 2.0 * np.pi * r
    val, _ = quad(integrand, 0.0, R, limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


@dataclass(frozen=True)
class SingularBubble:
    """|y|^2-weight bubble with scale `scale` (Lambda) and shift `shift` (xi).

    `bare=True` drops the 1/(2 h20) factor, matching the convention in
    which lap U + |y|^2 e^U = 0; the default convention solves
    lap U + 2 h20 |y|^2 e^U = 0.
    """

    scale: float
    shift: complex = 0.0
    h20: float = 1.0
    bare: bool = False

    def __post_init__(self):
        if self.scale <= 0 or self.h20 <= 0:
            raise ValueError("scale and h20 must be positive")

    def _denominator(self, z: np.ndarray) -> np.ndarray:
        w = np.asarray(z, dtype=complex) ** 2 - self.shift
        return 1.0 + (self.scale / 32.0) * (w.real**2 + w.imag**2)

    def __call__(self, z) -> np.ndarray:
        d = self._denominator(z)
        out = np.log(self.scale) - 2.0 * np.log(d)
        if not self.bare:
            out = out - np.log(2.0 * self.h20)
        return out

    def derivatives(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(dU/dLambda, dU/dxi, dU/dxibar) at z.

        With S = |z^2 - xi|^2 and D = 1 + (Lambda/32) S:
           dU/dLambda = 1/Lambda - S / (16 D)
           dU/dxi     = (Lambda/16) (conj(z^2 - xi)) / D
           dU/dxibar  = (Lambda/16) (z^2 - xi) / D
        (log-derivatives carry a single power of D).
        """
        w = np.asarray(z, dtype=complex) ** 2 - self.shift
        S = w.real**2 + w.imag**2
        D = 1.0 + (self.scale / 32.0) * S
        d_lam = 1.0 / self.scale - S / (16.0 * D)
        d_xi = (self.scale / 16.0) * np.conj(w) / D
        d_xibar = (self.scale / 16.0) * w / D
        return d_lam, d_xi, d_xibar


def eval_singular_bubble(b: SingularBubble, z) -> float | np.ndarray:
    out = b(z)
    return float(out) if np.ndim(out) == 0 else out


def singular_bubble_derivatives(b: SingularBubble, z):
    d_lam, d_xi, d_xibar = b.derivatives(z)
    if np.ndim(d_lam) == 0:
        return float(d_lam), complex(d_xi), complex(d_xibar)
    return d_lam, d_xi, d_xibar


def singular_bubble_mass(b: SingularBubble, rtol: float = 1e-10,
                         n_theta: int = 64) -> tuple[float, float]:
    """2 h20 int |y|^2 e^U  by polar quadrature with tail; (value, err)."""
    pref = 1.0 if b.bare else 2.0 * b.h20

    def ring(r):
        theta = (np.arange(n_theta) + 0.5) * (2 * np.pi / n_theta)
        z = r * np.exp(1j * theta)
        vals = np.exp(b(z))
        return pref * r**2 * np.mean(vals) * 2.0 * np.pi * r

    scale = max((32.0 / b.scale) ** 0.25, abs(b.shift) ** 0.5, 1.0)
    return _radial_with_tail(ring, scale, decay_hint=5.0, rtol=rtol)


def _radial_with_tail(f, scale: float, decay_hint: float,
                      rtol: float) -> tuple[float, float]:
    """Adaptive quadrature of int_0^inf f(r) dr for f ~ C r^{-p} at infinity.

    Integrates to R = 10^4 * scale in dyadic panels, then extrapolates the
    algebraic tail with the exponent measured from the last two panels'
    endpoint values.
    """
    R = 1e4 * scale
    edges = [0.0, scale]
    while edges[-1] < R:
        edges.append(min(edges[-1] * 2.0, R) if edges[-1] > 0 else scale)
    total = 0.0
    err = 0.0
    for a, bnd in zip(edges[:-1], edges[1:]):
        v, e = quad(f, a, bnd, limit=200, epsabs=1e-14, epsrel=rtol)
        total += v
        err += e
    fa, fb = f(R / 2.0), f(R)
    if fb > 0 and fa > 0:
        p = np.log(fa / fb) / np.log(2.0)
        if p <= 1.0:
            p = decay_hint
        tail = fb * R / (p - 1.0)
        total += tail
        err += abs(tail) * 2.0 ** (-(p - 1.0))
    return total, err


def log_moment_integral(split: float | None = None) -> float:
    """Quadrature value of int_0^inf log r * r/(1+r^2)^2 dr (= 0 exactly).

    With `split`, returns only int_0^split (engine self-test hook).
    """
    def f(r):
        return np.log(r) * r / (1.0 + r * r) ** 2

    if split is not None:
        val, _ = quad(f, 0.0, split, limit=400, epsabs=1e-14, epsrel=1e-13)
        return val
    v1, _ = quad(f, 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-13)
    v2, _ = quad(f, 1.0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-13)
    return v1 + v2


# ---------------------------------------------------------------------------
# 3-point interpolation matrix (parameter-matching machinery)
# ---------------------------------------------------------------------------

@dataclass
class InterpolationMatrix:
    """Derivative matrices of the singular bubble at p_l = s^{1+eps l} e^{i theta_l}.

    m1 rows are (dLambda, dxi, dxibar) evaluated at the three points; m2 is
    m1 with rows rescaled by (-Lambda, s^{2+6eps}/2, s^{2+6eps}/2), the
    normalization under which the entries tend to the closed reduced form
      [[1,1,1],
       [s^{4e} e^{-2i t1}, s^{2e} e^{-2i t2}, e^{-2i t3}],
       [s^{4e} e^{+2i t1}, s^{2e} e^{+2i t2}, e^{+2i t3}]].
    `leading` is the exact determinant of that reduced form,
      2i [s^{6e} sin 2(t2-t1) - s^{4e} sin 2(t3-t1) + s^{2e} sin 2(t3-t2)],
    whose leading term is `leading_term` = 2i sin(2(t2-t1)) s^{6e}.
    """

    points: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    det_m1: complex
    det_m2: complex
    leading: complex
    leading_term: complex
    ratio: complex
    cond: float
    degenerate: bool
    s: float = 0.0
    eps: float = 0.0
    thetas: tuple[float, float, float] = (0.0, 0.0, 0.0)


def build_interpolation_matrix(s: float, eps: float, thetas, b: SingularBubble,
                               ) -> InterpolationMatrix:
    if s <= 1.0:
        raise ValueError("s must exceed 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    t1, t2, t3 = (float(t) for t in thetas)
    pts = np.array([s ** (1.0 + eps * l) * np.exp(1j * tl)
                    for l, tl in zip((1, 2, 3), (t1, t2, t3))])
    d_lam, d_xi, d_xibar = b.derivatives(pts)
    m1 = np.vstack([d_lam.astype(complex), d_xi, d_xibar])
    row_scale = np.array([-b.scale,
                          0.5 * s ** (2.0 + 6.0 * eps),
                          0.5 * s ** (2.0 + 6.0 * eps)])
    m2 = m1 * row_scale[:, None]
    det_m1 = complex(np.linalg.det(m1))
    det_m2 = complex(np.linalg.det(m2))
    leading = 2j * (s ** (6 * eps) * np.sin(2 * (t2 - t1))
                    - s ** (4 * eps) * np.sin(2 * (t3 - t1))
                    + s ** (2 * eps) * np.sin(2 * (t3 - t2)))
    leading_term = 2j * np.sin(2 * (t2 - t1)) * s ** (6 * eps)
    degenerate = bool(abs(np.sin(2 * (t2 - t1))) < 1e-12)
    ratio = det_m2 / leading if leading != 0 else complex("nan")
    return InterpolationMatrix(
        points=pts, m1=m1, m2=m2, det_m1=det_m1, det_m2=det_m2,
        leading=complex(leading), leading_term=complex(leading_term),
        ratio=ratio, cond=float(np.linalg.cond(m1)), degenerate=degenerate,
        s=s, eps=eps, thetas=(t1, t2, t3),
    )


def real_parameter_matrix(b: SingularBubble, pts: np.ndarray) -> np.ndarray:
    """Rows (dLambda, dxi1, dxi2) at the given points (xi = xi1 + i xi2)."""
    d_lam, d_xi, _ = b.derivatives(pts)
    # dU/dxi1 = 2 Re dU/dxi,  dU/dxi2 = -2 Im dU/dxi  for real U
    return np.vstack([d_lam.astype(complex),
                      2.0 * d_xi.real + 0j,
                      -2.0 * d_xi.imag + 0j])
