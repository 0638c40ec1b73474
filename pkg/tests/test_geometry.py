import numpy as np
import pytest

from todalab.grid import TorusGrid
from todalab.geometry import (
    ConformalMetric,
    EwaldGreen,
    gauss_curvature,
    green_function,
    greens_table,
    laplace_beltrami,
    robin_function,
    theta_green,
)


@pytest.fixture(scope="module")
def flat_unit():
    return ConformalMetric(TorusGrid(64))


@pytest.fixture(scope="module")
def wavy():
    g = TorusGrid(96)
    x1, _ = g.coords()
    return ConformalMetric(g, 0.2 * np.cos(2 * np.pi * x1))


class TestLaplaceBeltrami:
    def test_constant_in_kernel(self, flat_unit):
        f = np.full((64, 64), 3.7)
        assert np.max(np.abs(laplace_beltrami(f, flat_unit))) < 1e-12

    def test_flat_eigenfunction(self, flat_unit):
        g = flat_unit.grid
        x1, _ = g.coords()
        f = np.sin(2 * np.pi * x1)
        out = laplace_beltrami(f, flat_unit)
        assert np.max(np.abs(out + (2 * np.pi) ** 2 * f)) < 1e-10

    def test_against_finite_differences(self):
        g = TorusGrid(128)
        x1, x2 = g.coords()
        m = ConformalMetric(g, 0.1 * np.cos(2 * np.pi * x1))
        rng = np.random.default_rng(7)
        f = np.zeros((g.n, g.n))
        for k1 in range(1, 4):
            for k2 in range(1, 4):
                f += rng.normal() * np.sin(2 * np.pi * (k1 * x1 + k2 * x2))
        h = g.spacing[0]
        fd = (np.roll(f, -1, 0) + np.roll(f, 1, 0) - 2 * f) / h**2
        h2 = g.spacing[1]
        fd += (np.roll(f, -1, 1) + np.roll(f, 1, 1) - 2 * f) / h2**2
        fd *= np.exp(-m.phi)
        out = laplace_beltrami(f, m)
        # second-order FD scheme error O(h^2)
        assert np.max(np.abs(out - fd)) < 50.0 * h**2 * np.max(np.abs(out))

    def test_divergence_theorem(self, wavy):
        g = wavy.grid
        x1, x2 = g.coords()
        f = np.exp(np.sin(2 * np.pi * x1) + 0.5 * np.cos(4 * np.pi * x2))
        assert abs(wavy.integrate(laplace_beltrami(f, wavy))) < 1e-10

    def test_grid_mismatch_raises(self, flat_unit):
        with pytest.raises(ValueError):
            laplace_beltrami(np.zeros((32, 32)), flat_unit)


class TestGreenFlat:
    def test_ewald_matches_theta_oracle(self):
        for lengths in ((1.0, 1.0), (1.0, 1.5), (2.0, 1.0)):
            ew = EwaldGreen(lengths)
            rng = np.random.default_rng(3)
            d = rng.uniform(0.02, 0.9, size=(12, 2)) * np.asarray(lengths)
            assert np.max(np.abs(ew.value(d) - theta_green(d, lengths))) < 1e-13

    def test_symmetry(self, flat_unit):
        x, y = (0.5, 0.5), (0.0, 0.0)
        a = green_function(x, y, flat_unit).g_value
        b = green_function(y, x, flat_unit).g_value
        assert abs(a - b) < 1e-12

    def test_oracle_point_value(self, flat_unit):
        # ten pairs against the theta closed form (independent route)
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.uniform(0, 1, 2)
            y = rng.uniform(0, 1, 2)
            if np.hypot(*(x - y)) < 0.05:
                y = (y + 0.5) % 1.0
            ev = green_function(x, y, flat_unit)
            ref = theta_green(flat_unit.grid.min_image(x - y), (1.0, 1.0))
            assert abs(ev.g_value - ref) < 1e-8

    def test_flat_diagonal_beta_gradient_vanishes(self, flat_unit):
        rng = np.random.default_rng(5)
        for _ in range(6):
            x = rng.uniform(0, 1, 2)
            _, grad = robin_function(x, flat_unit)
            assert np.max(np.abs(grad)) < 1e-8

    def test_discrete_residual(self, flat_unit, wavy):
        for m in (flat_unit, wavy):
            r = m.green().discrete_residual(np.array([0.3, 0.45]))
            assert r < 1e-8

    def test_coincident_requires_robin(self, flat_unit):
        with pytest.raises(ValueError):
            green_function((0.25, 0.5), (0.25, 0.5), flat_unit)

    def test_requires_normalized_metric(self):
        g = TorusGrid(32, (1.0, 2.0))
        m = ConformalMetric(g, normalize=False)
        with pytest.raises(ValueError):
            m.green()


class TestGreenConformal:
    def test_symmetry(self, wavy):
        a = green_function((0.3, 0.4), (0.7, 0.1), wavy).g_value
        b = green_function((0.7, 0.1), (0.3, 0.4), wavy).g_value
        assert abs(a - b) < 1e-12

    def test_grad1_against_finite_differences(self, wavy):
        rng = np.random.default_rng(13)
        h = 1e-6
        for _ in range(10):
            x = rng.uniform(0, 1, 2)
            y = rng.uniform(0, 1, 2)
            if np.hypot(*wavy.grid.min_image(x - y)) < 0.1:
                y = (y + 0.5) % 1.0
            ev = green_function(x, y, wavy)
            for which, grad in (("g_value", ev.grad1_g), ("beta_value", ev.grad1_beta)):
                fd = np.array([
                    (getattr(green_function(x + np.array([h, 0]), y, wavy), which)
                     - getattr(green_function(x - np.array([h, 0]), y, wavy), which)) / (2 * h),
                    (getattr(green_function(x + np.array([0, h]), y, wavy), which)
                     - getattr(green_function(x - np.array([0, h]), y, wavy), which)) / (2 * h),
                ])
                denom = max(np.max(np.abs(fd)), 1e-3)
                assert np.max(np.abs(grad - fd)) / denom < 1e-6

    def test_robin_gradient_against_finite_differences(self, wavy):
        x = np.array([0.21, 0.55])
        h = 1e-5
        beta, grad = robin_function(x, wavy)
        fd = np.array([
            (robin_function(x + np.array([h, 0]), wavy)[0]
             - robin_function(x - np.array([h, 0]), wavy)[0]) / (2 * h),
            (robin_function(x + np.array([0, h]), wavy)[0]
             - robin_function(x - np.array([0, h]), wavy)[0]) / (2 * h),
        ])
        assert np.max(np.abs(grad)) > 1e-3  # genuinely nonzero for this metric
        assert np.max(np.abs(grad - fd)) / np.max(np.abs(fd)) < 1e-6

    def test_gauge_discrete(self, wavy):
        # discrete-route Green field integrates to zero against dV_g
        g = wavy.grid
        gf = wavy.green()
        k1, k2 = g.wavenumbers()
        x = np.array([0.3, 0.45])
        delta_hat = np.exp(-1j * (k1 * x[0] + k2 * x[1])) / g.cell_area
        rhs = g.ifft(delta_hat) - wavy.weight
        Gd = g.inverse_laplacian(-rhs)
        Gd -= wavy.integrate(Gd)
        assert abs(wavy.integrate(Gd)) < 1e-12

    def test_gauge_analytic_converges(self):
        # grid quadrature of the analytic G(x,.) dV_g shrinks like the
        # trapezoid error of the log singularity
        vals = []
        for n in (64, 128):
            g = TorusGrid(n)
            x1, _ = g.coords()
            m = ConformalMetric(g, 0.2 * np.cos(2 * np.pi * x1))
            pot = m.green().potential_field(np.array([0.375, 0.625]))
            vals.append(abs(m.integrate(pot)))
        assert vals[1] < vals[0] / 3


class TestCurvature:
    def test_flat_zero(self, flat_unit):
        assert abs(gauss_curvature(flat_unit, (0.2, 0.8))) < 1e-12

    def test_closed_form(self):
        g = TorusGrid(64)
        x1, _ = g.coords()
        eps = 0.1
        m = ConformalMetric(g, eps * np.cos(2 * np.pi * x1), normalize=False)
        for x in ((0.0, 0.0), (0.3, 0.7), (0.25, 0.1)):
            expected = 2 * np.pi**2 * eps * np.cos(2 * np.pi * x[0]) \
                * np.exp(-eps * np.cos(2 * np.pi * x[0]))
            assert abs(gauss_curvature(m, x) - expected) < 1e-10

    def test_gauss_bonnet(self, wavy):
        K = wavy.gauss_curvature_field()
        assert abs(wavy.integrate(K)) < 1e-8


def test_greens_table_columns(flat_unit):
    rows = greens_table(flat_unit, np.array([[0.1, 0.2, 0.6, 0.7]]))
    assert list(rows[0]) == ["x1", "x2", "y1", "y2", "G", "beta",
                             "dG1", "dG2", "dbeta1", "dbeta2"]
