import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from todalab.profiles import (
    InterpolationMatrix,
    SingularBubble,
    StandardBubble,
    build_interpolation_matrix,
    eval_standard_bubble,
    log_moment_integral,
    real_parameter_matrix,
    singular_bubble_mass,
    standard_bubble_mass,
    standard_bubble_truncated_mass,
)


class TestStandardBubble:
    def test_peak_value(self):
        b = StandardBubble(height=2.3, center=(0.4, -0.1), coeff=0.6)
        assert eval_standard_bubble(b, (0.4, -0.1)) == pytest.approx(2.3, abs=0)

    def test_far_field(self):
        b = StandardBubble(height=2.0, center=(0.0, 0.0), coeff=1.0)
        r = 1e3
        val = eval_standard_bubble(b, (r, 0.0))
        limit = -b.height - 2 * np.log(b.coeff)
        assert abs(val + 4 * np.log(r) - limit) < 1e-6

    def test_closed_form_point(self):
        b = StandardBubble(height=0.0, coeff=0.25)
        assert eval_standard_bubble(b, (2.0, 0.0)) == pytest.approx(-2 * np.log(2), rel=1e-14)

    def test_mass_8pi(self):
        for lam, h in ((0.0, 1.0), (3.0, 0.5), (-1.0, 2.0)):
            b = StandardBubble.from_h(lam, h)
            val, err = standard_bubble_mass(b, h)
            assert abs(val - 8 * np.pi) < 1e-6
            assert err < 1e-6

    def test_truncation_deficit(self):
        lam, h = 1.0, 1.0
        b = StandardBubble.from_h(lam, h)
        # deficit of the truncated mass ~ 8 pi / (1 + e^lam c R^2)
        c = b.coeff
        R = np.sqrt((1e3 - 1) / (np.exp(lam) * c))  # deficit ~ 8 pi * 1e-3
        got = 8 * np.pi - standard_bubble_truncated_mass(b, h, R)
        expected = 8 * np.pi / (1 + np.exp(lam) * c * R**2)
        assert got == pytest.approx(expected, rel=1e-3)

    @given(shift=st.floats(-2, 2), c1=st.floats(-0.4, 0.4), c2=st.floats(-0.4, 0.4))
    @settings(max_examples=12, deadline=None)
    def test_mass_invariance(self, shift, c1, c2):
        h = 0.8
        a, _ = standard_bubble_mass(StandardBubble.from_h(1.0, h), h)
        b, _ = standard_bubble_mass(
            StandardBubble.from_h(1.0 + shift, h, center=(c1, c2)), h)
        assert abs(a - b) < 1e-10 * 8 * np.pi + 1e-7

    def test_solves_liouville_equation(self):
        # lap U + 2 h e^U = 0 via 4th-order finite differences
        h0 = 0.9
        b = StandardBubble.from_h(1.2, h0, center=(0.1, -0.3))
        rng = np.random.default_rng(2)
        pts = rng.normal(scale=1.5, size=(100, 2))
        step = 1e-3
        for p in pts:
            lap = _fd_laplacian(lambda q: eval_standard_bubble(b, q), p, step)
            res = lap + 2 * h0 * np.exp(eval_standard_bubble(b, p))
            assert abs(res) < 1e-6

    def test_bad_coeff_rejected(self):
        with pytest.raises(ValueError):
            StandardBubble(height=0.0, coeff=-1.0)


def _fd_laplacian(f, p, h):
    """4th-order 2D Laplacian stencil."""
    def g(dx, dy):
        return f((p[0] + dx * h, p[1] + dy * h))
    lap = 0.0
    for axis in (0, 1):
        c = [-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12]
        for k, off in enumerate((-2, -1, 0, 1, 2)):
            lap += c[k] * (g(off, 0) if axis == 0 else g(0, off))
    return lap / h**2


class TestSingularBubble:
    def test_mass_16pi(self):
        for lam, xi, h20 in ((1.0, 0.0, 1.0), (3.0, 1 + 2j, 0.5)):
            val, err = singular_bubble_mass(SingularBubble(lam, xi, h20))
            assert abs(val - 16 * np.pi) < 1e-6
            assert err < 1e-6

    def test_radial_symmetry_at_zero_shift(self):
        b = SingularBubble(2.0, 0.0, 1.0)
        theta = np.linspace(0, 2 * np.pi, 57)
        for r in (0.3, 1.0, 4.0):
            vals = b(r * np.exp(1j * theta))
            assert vals.max() - vals.min() < 1e-12

    def test_far_field(self):
        lam, xi, h20 = 1.7, 0.4 - 0.3j, 0.8
        b = SingularBubble(lam, xi, h20)
        r = 1e3
        limit = -np.log(lam) + 2 * np.log(32) - np.log(2 * h20)
        for z in (r, r * 1j, r * np.exp(0.7j)):
            assert abs(b(z) + 8 * np.log(r) - limit) < 1e-4

    def test_solves_weighted_liouville(self):
        lam, xi, h20 = 1.1, 0.8 + 0.2j, 0.7
        b = SingularBubble(lam, xi, h20)
        rng = np.random.default_rng(4)
        pts = rng.normal(scale=2.0, size=(120, 2))
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 0.1][:100]
        step = 1e-3
        for p in pts:
            z0 = complex(p[0], p[1])
            lap = _fd_laplacian(lambda q: float(b(complex(q[0], q[1]))), p, step)
            res = lap + 2 * h20 * abs(z0) ** 2 * np.exp(float(b(z0)))
            assert abs(res) < 1e-6

    def test_derivatives_at_critical_set(self):
        b = SingularBubble(2.5, 1.0 + 1.0j, 1.0)
        z = np.sqrt(b.shift)
        d_lam, d_xi, _ = b.derivatives(z)
        assert d_lam == pytest.approx(1 / b.scale, rel=1e-14)
        assert abs(d_xi) < 1e-14

    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(9)
        h = 1e-6
        for _ in range(20):
            lam = float(rng.uniform(0.2, 5.0))
            xi = complex(rng.normal(), rng.normal())
            z = complex(rng.normal(scale=3), rng.normal(scale=3))
            b = SingularBubble(lam, xi, 0.8)
            d_lam, d_xi, _ = b.derivatives(z)
            fd_lam = (SingularBubble(lam + h, xi, 0.8)(z)
                      - SingularBubble(lam - h, xi, 0.8)(z)) / (2 * h)
            fd_x1 = (SingularBubble(lam, xi + h, 0.8)(z)
                     - SingularBubble(lam, xi - h, 0.8)(z)) / (2 * h)
            fd_x2 = (SingularBubble(lam, xi + 1j * h, 0.8)(z)
                     - SingularBubble(lam, xi - 1j * h, 0.8)(z)) / (2 * h)
            scale = max(abs(fd_lam), abs(fd_x1), abs(fd_x2), 1e-6)
            assert abs(d_lam - fd_lam) / scale < 1e-6
            assert abs(2 * d_xi.real - fd_x1) / scale < 1e-6
            assert abs(-2 * d_xi.imag - fd_x2) / scale < 1e-6

    def test_conjugation(self):
        b = SingularBubble(1.3, 0.5 - 0.9j, 1.2)
        _, d_xi, d_xibar = b.derivatives(1.7 + 0.4j)
        assert d_xibar == pytest.approx(np.conj(d_xi), rel=1e-14)

    def test_bare_convention(self):
        b = SingularBubble(2.0, 0.3, h20=0.7)
        bb = SingularBubble(2.0, 0.3, h20=0.7, bare=True)
        assert float(bb(1.0)) - float(b(1.0)) == pytest.approx(np.log(2 * 0.7), rel=1e-13)


class TestInterpolationMatrix:
    def test_determinant_ratio_converges(self):
        b = SingularBubble(1.0, 0.3 + 0.2j, 1.0)
        for s in (1e2, 1e3, 1e4):
            im = build_interpolation_matrix(s, 0.05, (0, np.pi / 4, np.pi / 2), b)
            assert abs(im.ratio - 1) < 0.05
        # the single leading term only dominates at the s^{4 eps} order
        im = build_interpolation_matrix(1e4, 0.05, (0, np.pi / 4, np.pi / 2), b)
        assert abs(im.det_m2 / im.leading_term - 1) == pytest.approx(
            1e4 ** (-4 * 0.05), rel=1e-4)

    def test_degenerate_angles_slope(self):
        # theta2 = theta1 forces |det| = 2 sin(2(t3-t1)) (s^{4e} - s^{2e});
        # the s^{2e} subtraction biases the log-log slope until s is large
        b = SingularBubble(1.0, 0.0, 1.0)
        eps = 0.05
        ss = np.array([1e10, 1e11, 1e12, 1e13])
        dets = []
        for s in ss:
            im = build_interpolation_matrix(s, eps, (0.3, 0.3, 0.3 + np.pi / 4), b)
            assert im.degenerate
            dets.append(abs(im.det_m2))
        slope = np.polyfit(np.log(ss), np.log(dets), 1)[0]
        assert abs(slope - 4 * eps) < 0.1 * 4 * eps

    def test_m_and_m1_invertible_together(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            b = SingularBubble(float(rng.uniform(0.5, 4)),
                               complex(rng.normal(), rng.normal()), 1.0)
            s = float(rng.uniform(20, 200))
            eps = float(rng.uniform(0.03, 0.2))
            thetas = rng.uniform(0, np.pi, 3)
            im = build_interpolation_matrix(s, eps, thetas, b)
            det_m = np.linalg.det(real_parameter_matrix(b, im.points))
            # direct 3x3 oracle: M = T M1 with constant T, det T = -2i
            assert abs(det_m + 2j * im.det_m1) < 1e-12 * max(1.0, abs(det_m))
            assert (abs(det_m) > 0) == (abs(im.det_m1) > 0)

    def test_rejects_bad_parameters(self):
        b = SingularBubble(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            build_interpolation_matrix(0.5, 0.05, (0, 1, 2), b)
        with pytest.raises(ValueError):
            build_interpolation_matrix(10.0, 1.5, (0, 1, 2), b)


class TestLogMoment:
    def test_vanishes(self):
        assert abs(log_moment_integral()) < 1e-10

    def test_halves_antisymmetric(self):
        lower = log_moment_integral(split=1.0)
        total = log_moment_integral()
        upper = total - lower
        assert abs(lower + upper) < 1e-10

    def test_partial_against_oracle(self):
        # independent high-order oracle for int_0^1
        val, _ = quad(lambda r: np.log(r) * r / (1 + r * r) ** 2, 0, 1,
                      epsabs=1e-15, epsrel=1e-14, limit=500)
        assert abs(log_moment_integral(split=1.0) - val) < 1e-12
        # closed form: -log(2)/4
        assert abs(val + np.log(2) / 4) < 1e-12
