"""Discrete SU(3) Toda mean-field system on the torus.

Normalized form solved here:

    lap_g u1 + 2 rho1 h1 e^{u1} - rho2 h2 e^{u2} = 2 rho1 - rho2
    lap_g u2 -   rho1 h1 e^{u1} + 2 rho2 h2 e^{u2} = 2 rho2 - rho1
    int_M h_i e^{u_i} dV_g = 1

The additive gauge freedom is removed by working with the projective
variables w_i = h_i e^{v_i} / int h_i e^{v_i}, which keeps every iterate
normalized and every residual exactly dV_g-mean-free, so Newton runs in
the mean-zero subspace with a GMRES inner solve preconditioned by the
(shifted) inverse Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, splu

from .geometry import ConformalMetric


@dataclass(frozen=True)
class SystemParams:
    rho: tuple[float, float]
    h1: np.ndarray
    h2: np.ndarray
    metric: ConformalMetric

    def __post_init__(self):
        g = self.metric.grid
        g.check_field(self.h1, "h1")
        g.check_field(self.h2, "h2")
        if np.min(self.h1) <= 0 or np.min(self.h2) <= 0:
            raise ValueError("coefficient fields h1, h2 must be strictly positive")
        if min(self.rho) <= 0:
            raise ValueError("rho parameters must be positive")

    def with_rho(self, rho) -> "SystemParams":
        return SystemParams((float(rho[0]), float(rho[1])), self.h1, self.h2,
                            self.metric)

    def h(self, i: int) -> np.ndarray:
        return self.h1 if i == 1 else self.h2


@dataclass
class CoupledState:
    u1: np.ndarray
    u2: np.ndarray
    normalization_residuals: tuple[float, float] = (np.inf, np.inf)

    def component(self, i: int) -> np.ndarray:
        return self.u1 if i == 1 else self.u2

    def heights(self) -> tuple[float, float]:
        return float(np.max(self.u1)), float(np.max(self.u2))

    def copy(self) -> "CoupledState":
        return CoupledState(self.u1.copy(), self.u2.copy(),
                            self.normalization_residuals)


@dataclass
class NewtonTrace:
    residual_norms: list[float] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)
    converged: bool = False
    sigma_min_proxy: float = np.inf

    @property
    def iterations(self) -> int:
        return len(self.step_norms)


class NewtonError(RuntimeError):
    def __init__(self, message: str, trace: NewtonTrace):
        super().__init__(message)
        self.trace = trace


def _log_integral(m: ConformalMetric, h: np.ndarray, u: np.ndarray) -> float:
    """log of int h e^u dV_g, overflow-safe via max subtraction."""
    peak = float(np.max(u))
    return peak + np.log(m.integrate(h * np.exp(u - peak)))


def normalize(s: CoupledState, p: SystemParams) -> CoupledState:
    m = p.metric
    u1 = s.u1 - _log_integral(m, p.h1, s.u1)
    u2 = s.u2 - _log_integral(m, p.h2, s.u2)
    r1 = m.integrate(p.h1 * np.exp(u1)) - 1.0
    r2 = m.integrate(p.h2 * np.exp(u2)) - 1.0
    return CoupledState(u1, u2, (abs(r1), abs(r2)))


def is_normalized(s: CoupledState, p: SystemParams, tol: float = 1e-8) -> bool:
    m = p.metric
    return (abs(m.integrate(p.h1 * np.exp(s.u1)) - 1.0) < tol
            and abs(m.integrate(p.h2 * np.exp(s.u2)) - 1.0) < tol)


def residual(s: CoupledState, p: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    if not is_normalized(s, p):
        raise ValueError("state is not normalized; call normalize() first")
    m = p.metric
    rho1, rho2 = p.rho
    w1 = p.h1 * np.exp(s.u1)
    w2 = p.h2 * np.exp(s.u2)
    f1 = m.laplace_beltrami(s.u1) + 2 * rho1 * w1 - rho2 * w2 - (2 * rho1 - rho2)
    f2 = m.laplace_beltrami(s.u2) - rho1 * w1 + 2 * rho2 * w2 - (2 * rho2 - rho1)
    return f1, f2


class _ProjectiveSystem:
    """Residual/Jacobian in the gauge-free variables (v1, v2)."""

    def __init__(self, p: SystemParams):
        self.p = p
        self.m = p.metric
        self.g = p.metric.grid
        self.n2 = self.g.n ** 2

    def pack(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.concatenate([a.ravel(), b.ravel()])

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = self.g.n
        return x[:self.n2].reshape(n, n), x[self.n2:].reshape(n, n)

    def state_to_v(self, s: CoupledState) -> np.ndarray:
        return self.pack(s.u1 - self.m.integrate(s.u1),
                         s.u2 - self.m.integrate(s.u2))

    def v_to_state(self, x: np.ndarray) -> CoupledState:
        v1, v2 = self.unpack(x)
        return normalize(CoupledState(v1, v2), self.p)

    def weights(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v1, v2 = self.unpack(x)
        w1 = self.p.h1 * np.exp(v1 - _log_integral(self.m, self.p.h1, v1))
        w2 = self.p.h2 * np.exp(v2 - _log_integral(self.m, self.p.h2, v2))
        return w1, w2

    def residual(self, x: np.ndarray, rho) -> np.ndarray:
        rho1, rho2 = rho
        w1, w2 = self.weights(x)
        v1, v2 = self.unpack(x)
        f1 = self.m.laplace_beltrami(v1) + 2 * rho1 * w1 - rho2 * w2 \
            - (2 * rho1 - rho2)
        f2 = self.m.laplace_beltrami(v2) - rho1 * w1 + 2 * rho2 * w2 \
            - (2 * rho2 - rho1)
        return self.pack(f1, f2)

    def jacobian(self, x: np.ndarray, rho) -> LinearOperator:
        rho1, rho2 = rho
        w1, w2 = self.weights(x)
        m = self.m

        def mul(w, d):
            # derivative of w(v): multiplication minus rank-one mass correction
            return w * d - w * m.integrate(w * d)

        def matvec(d):
            d1, d2 = self.unpack(d)
            j1 = m.laplace_beltrami(d1) + 2 * rho1 * mul(w1, d1) \
                - rho2 * mul(w2, d2)
            j2 = m.laplace_beltrami(d2) - rho1 * mul(w1, d1) \
                + 2 * rho2 * mul(w2, d2)
            # ground the constant null space; residuals are dV_g-mean-free,
            # so the grounded solve returns the mean-zero Newton step
            j1 += m.integrate(d1)
            j2 += m.integrate(d2)
            return self.pack(j1, j2)

        return LinearOperator((2 * self.n2, 2 * self.n2), matvec=matvec)

    def rho_derivative(self, x: np.ndarray, drho) -> np.ndarray:
        w1, w2 = self.weights(x)
        d1, d2 = drho
        f1 = d1 * (2 * w1 - 2.0) + d2 * (1.0 - w2)
        f2 = d1 * (1.0 - w1) + d2 * (2 * w2 - 2.0)
        return self.pack(f1, f2)

    def preconditioner(self, shift: float = 1.0) -> LinearOperator:
        g = self.g
        k1, k2 = g.wavenumbers()
        sym = -(k1**2 + k2**2) - shift
        weight = self.m.weight

        def solve_one(r):
            return g.ifft(g.fft(weight * r) / sym)

        def matvec(r):
            r1, r2 = self.unpack(r)
            return self.pack(solve_one(r1), solve_one(r2))

        return LinearOperator((2 * self.n2, 2 * self.n2), matvec=matvec)

    def _fd_laplacian(self) -> sp.csr_matrix:
        g = self.g
        n = g.n
        h1, h2 = g.spacing
        ex = np.ones(n)
        d1 = sp.diags([ex[:-1], ex[:-1], -2 * ex], [-1, 1, 0],
                      shape=(n, n), format="lil")
        d1[0, -1] = 1.0
        d1[-1, 0] = 1.0
        eye = sp.identity(n, format="csr")
        lap = sp.kron(d1.tocsr() / h1**2, eye) + sp.kron(eye, d1.tocsr() / h2**2)
        return lap.tocsr()

    def fd_preconditioner(self, x: np.ndarray, rho) -> LinearOperator:
        """SuperLU factorization of the finite-difference analogue of J.

        The 5-point Laplacian plus the exact multiplication potentials
        captures both the smooth operator and the sharp bubble potential;
        the low-rank mass corrections and grounding are left to GMRES.
        """
        if not hasattr(self, "_lap_fd"):
            self._lap_fd = self._fd_laplacian()
        rho1, rho2 = rho
        w1, w2 = self.weights(x)
        inv_weight = sp.diags(np.exp(-self.m.phi).ravel())
        lapg = inv_weight @ self._lap_fd
        a11 = lapg + sp.diags(2 * rho1 * w1.ravel())
        a12 = sp.diags(-rho2 * w2.ravel())
        a21 = sp.diags(-rho1 * w1.ravel())
        a22 = lapg + sp.diags(2 * rho2 * w2.ravel())
        A = sp.bmat([[a11, a12], [a21, a22]], format="csc")
        lu = splu(A)
        return LinearOperator((2 * self.n2, 2 * self.n2), matvec=lu.solve)


def newton_solve(init: CoupledState, p: SystemParams, tol: float = 1e-9,
                 max_iter: int = 30, inner_tol: float = 1e-4,
                 raise_on_failure: bool = True) -> tuple[CoupledState, NewtonTrace]:
    """Damped Newton-GMRES on the gauge-free system; returns (state, trace).

    Steps are backtracked until the sup-norm residual decreases, which
    keeps bubble-seeded iterates inside their branch's basin; full steps
    resume near the root, so the terminal convergence stays quadratic.
    Near-singular Jacobians surface as GMRES stagnation; the trace
    carries sigma_min_proxy = ||F|| / ||step|| from the last iteration as
    a cheap smallest-singular-value proxy.
    """
    sys = _ProjectiveSystem(p)
    x = sys.state_to_v(normalize(init, p))
    trace = NewtonTrace()
    M = sys.preconditioner()
    F = sys.residual(x, p.rho)
    rnorm = float(np.max(np.abs(F)))
    for _ in range(max_iter):
        trace.residual_norms.append(rnorm)
        if rnorm < tol:
            trace.converged = True
            return sys.v_to_state(x), trace
        J = sys.jacobian(x, p.rho)
        eta = min(inner_tol, 0.1 * rnorm)
        delta, info = gmres(J, -F, M=M, rtol=eta, atol=0.0,
                            restart=100, maxiter=8)
        if info != 0:
            trace.sigma_min_proxy = rnorm / max(np.max(np.abs(delta)), 1e-300)
            if raise_on_failure:
                raise NewtonError(
                    f"GMRES stagnated (info={info}); Jacobian near-singular, "
                    f"sigma_min proxy {trace.sigma_min_proxy:.3e}", trace)
            return sys.v_to_state(x), trace
        snorm = float(np.max(np.abs(delta)))
        trace.step_norms.append(snorm)
        trace.sigma_min_proxy = rnorm / max(snorm, 1e-300)
        damping = 1.0
        while damping > 1e-4:
            x_try = x + damping * delta
            F_try = sys.residual(x_try, p.rho)
            r_try = float(np.max(np.abs(F_try)))
            if r_try < (1.0 - 0.2 * damping) * rnorm:
                break
            damping *= 0.5
        else:
            if raise_on_failure:
                raise NewtonError(
                    f"line search failed at residual {rnorm:.3e}", trace)
            return sys.v_to_state(x), trace
        x, F, rnorm = x_try, F_try, r_try
    trace.residual_norms.append(rnorm)
    if rnorm < tol:
        trace.converged = True
        return sys.v_to_state(x), trace
    if raise_on_failure:
        raise NewtonError(f"Newton did not converge in {max_iter} iterations "
                          f"(residual {trace.residual_norms[-1]:.3e})", trace)
    return sys.v_to_state(x), trace


def picard_solve(init: CoupledState, p: SystemParams, damping: float = 0.5,
                 tol: float = 1e-10, max_iter: int = 4000) -> CoupledState:
    """Damped Picard fixed-point iteration, contractive at small rho.

    Independent of the Newton path: each sweep inverts only the Laplacian
    on the explicit nonlinearity.
    """
    sys = _ProjectiveSystem(p)
    g = p.metric.grid
    x = sys.state_to_v(normalize(init, p))
    rho1, rho2 = p.rho
    for _ in range(max_iter):
        w1, w2 = sys.weights(x)
        rhs1 = (2 * rho1 - rho2) - 2 * rho1 * w1 + rho2 * w2
        rhs2 = (2 * rho2 - rho1) + rho1 * w1 - 2 * rho2 * w2
        v1new = g.inverse_laplacian(p.metric.weight * rhs1)
        v2new = g.inverse_laplacian(p.metric.weight * rhs2)
        xnew = sys.pack(v1new - p.metric.integrate(v1new),
                        v2new - p.metric.integrate(v2new))
        step = float(np.max(np.abs(xnew - x)))
        x = (1 - damping) * x + damping * xnew
        if step < tol:
            break
    return sys.v_to_state(x)


# ---------------------------------------------------------------------------
# Continuation
# ---------------------------------------------------------------------------

@dataclass
class PathPoint:
    rho: tuple[float, float]
    state: CoupledState
    lambda1: float
    lambda2: float
    step: float
    newton_iterations: int
    residual_inf: float


@dataclass
class ContinuationPath:
    points: list[PathPoint] = field(default_factory=list)
    reached_target: bool = False
    stop_reason: str = ""

    def rhos(self) -> np.ndarray:
        return np.array([pt.rho for pt in self.points])

    def heights(self) -> np.ndarray:
        return np.array([(pt.lambda1, pt.lambda2) for pt in self.points])


@dataclass
class ContinuationOptions:
    initial_step: float = 0.1
    max_step: float = 0.25
    min_step: float = 1e-6
    height_cap: float = 12.0
    sigma_min_floor: float = 1e-10
    newton_tol: float = 1e-9
    max_points: int = 200


def continue_to(p0: SystemParams, init: CoupledState, target_rho,
                opts: ContinuationOptions | None = None) -> ContinuationPath:
    """Continuation along the rho segment p0.rho -> target.

    t parametrizes the segment; a secant predictor extrapolates the state
    along the branch and Newton corrects at the new parameter, with steps
    adapted to Newton performance.  The path halts at the height cap, on
    a near-singular Jacobian, at step-size underflow (the fold signal;
    the tool stops at folds rather than rounding them), or on reaching
    the target.
    """
    opts = opts or ContinuationOptions()
    rho0 = np.asarray(p0.rho, dtype=float)
    rho1 = np.asarray(target_rho, dtype=float)
    drho = rho1 - rho0

    def params_at(t: float) -> SystemParams:
        return p0.with_rho(rho0 + t * drho)

    path = ContinuationPath()
    state, trace = newton_solve(init, p0, tol=opts.newton_tol)
    f1, f2 = residual(state, p0)
    path.points.append(PathPoint(tuple(rho0), state, *state.heights(), 0.0,
                                 trace.iterations,
                                 float(max(np.max(np.abs(f1)), np.max(np.abs(f2))))))

    t = 0.0
    dt = opts.initial_step
    prev_state = state
    prev_t = t
    while t < 1.0 and len(path.points) < opts.max_points:
        dt = min(dt, 1.0 - t)
        if dt < opts.min_step:
            path.stop_reason = "step-size underflow (fold point)"
            return path
        t_try = t + dt
        # secant predictor in state space
        if prev_t < t:
            frac = dt / (t - prev_t)
            pred = CoupledState(
                state.u1 + frac * (state.u1 - prev_state.u1),
                state.u2 + frac * (state.u2 - prev_state.u2))
        else:
            pred = state.copy()
        try:
            new_state, trace = newton_solve(pred, params_at(t_try),
                                            tol=opts.newton_tol, max_iter=12)
        except NewtonError as err:
            if err.trace.sigma_min_proxy < opts.sigma_min_floor:
                path.stop_reason = (
                    f"near-singular Jacobian (sigma proxy "
                    f"{err.trace.sigma_min_proxy:.2e})")
                return path
            dt *= 0.5
            continue
        prev_state, prev_t = state, t
        state, t = new_state, t_try
        f1, f2 = residual(state, params_at(t))
        lam1, lam2 = state.heights()
        path.points.append(PathPoint(tuple(rho0 + t * drho), state, lam1, lam2,
                                     dt, trace.iterations,
                                     float(max(np.max(np.abs(f1)),
                                               np.max(np.abs(f2))))))
        if max(lam1, lam2) > opts.height_cap:
            path.stop_reason = f"height cap {opts.height_cap} exceeded"
            return path
        if trace.iterations <= 4:
            dt = min(dt * 1.5, opts.max_step)
        elif trace.iterations > 8:
            dt *= 0.6
    path.reached_target = t >= 1.0
    if path.reached_target:
        path.stop_reason = "target reached"
    elif not path.stop_reason:
        path.stop_reason = "max points reached"
    return path


# ---------------------------------------------------------------------------
# Bubble-seeded states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BubbleSeed:
    """One glued bubble: component 1 or 2, standard or singular profile."""

    component: int
    center: tuple[float, float]
    height: float
    kind: str = "standard"            # "standard" | "singular"
    shift: complex = 0.6 + 0.3j       # singular only
    scale: float = 32.0               # singular Lambda


def seed_from_bubbles(seeds: list[BubbleSeed], p: SystemParams,
                      overlap_tol: float = 3.0) -> CoupledState:
    """Build (u1, u2) from glued bubbles plus the Green far fields the
    bubbling expansions dictate, then normalize.

    Standard bubbles are glued through l(x) = exp(-4 pi (G(x,c)-beta(c,c)))
    ~ |x-c|^2; each component also receives the log-dips generated by the
    other component's concentrated masses (coefficient -4 pi G per unit
    local mass 2).  Singular seeds install the |y|^2-weight profile with a
    tapered shift and the 12 pi G far field of the (2,4) collision.
    """
    m = p.metric
    g = m.grid
    gf = m.green()
    rho = p.rho

    comp_fields = {1: np.zeros((g.n, g.n)), 2: np.zeros((g.n, g.n))}
    std = [s for s in seeds if s.kind == "standard"]
    singular = [s for s in seeds if s.kind == "singular"]

    # overlap guard per component: bubble cores must stay separated
    for i, a in enumerate(std):
        for b in std[i + 1:]:
            if a.component != b.component:
                continue
            d = np.hypot(*g.min_image(np.asarray(a.center)
                                      - np.asarray(b.center)))
            ca = _local_coeff(p, a)
            cb = _local_coeff(p, b)
            ra = np.exp(-a.height / 2) / np.sqrt(ca)
            rb = np.exp(-b.height / 2) / np.sqrt(cb)
            if d < overlap_tol * (ra + rb):
                raise ValueError(
                    f"bubble supports at {a.center} and {b.center} overlap")

    for s in std:
        c = _local_coeff(p, s)
        ell = gf.log_distance_factor(np.asarray(s.center))
        comp_fields[s.component] += s.height \
            - 2.0 * np.log1p(np.exp(s.height) * c * ell)

    for s in singular:
        comp_fields[2] += _glued_singular(p, s, seeds)

    # cross-component log dips: other component's mass 2 at center -> -4 pi G
    for s in std + singular:
        other = 2 if s.component == 1 else 1
        if s.kind == "singular":
            # collision: the sigma_2 = 4 mass at the same point cancels the
            # u1 bubble's 8 pi G far field (net flat far field for u1)
            eps2 = np.exp(-s.height)
            ell = gf.log_distance_factor(np.asarray(s.center))
            comp_fields[1] += 2.0 * np.log1p(ell / (eps2 * _KAPPA_CROSS**2))
        else:
            if s.component == 1 and any(
                    np.hypot(*g.min_image(np.asarray(s.center)
                                          - np.asarray(sg.center))) < 0.05
                    for sg in singular):
                # the singular profile already carries this dip in its
                # log(kappa^2 + |y|^2) factor
                continue
            reg2 = np.exp(-s.height) / _local_coeff(p, s)
            ell = gf.log_distance_factor(np.asarray(s.center))
            comp_fields[other] += np.log(ell + _KAPPA_DIP**2 * reg2)

    state = normalize(CoupledState(comp_fields[1], comp_fields[2]), p)
    return state


_KAPPA_DIP = 1.0
_KAPPA_CROSS = 1.0


def _local_coeff(p: SystemParams, s: BubbleSeed) -> float:
    """Local Liouville coefficient c = 2 (rho h e^phi)(center) / 8."""
    g = p.metric.grid
    c = np.asarray(s.center, dtype=float)[None, :]
    h = p.h1 if s.component == 1 else p.h2
    hval = float(g.eval_at(h, c)[0])
    phival = float(g.eval_at(p.metric.phi, c)[0])
    rho = p.rho[0] if s.component == 1 else p.rho[1]
    return 2.0 * rho * hval * np.exp(phival) / 8.0


def _glued_singular(p: SystemParams, s: BubbleSeed,
                    all_seeds: list[BubbleSeed]) -> np.ndarray:
    """Singular-bubble profile at scale eps = e^{-height/2}, glued to the
    12 pi G far field; the shift is tapered off away from the center so
    the field stays exactly periodic.
    """
    m = p.metric
    g = m.grid
    gf = m.green()
    center = np.asarray(s.center, dtype=float)
    eps = np.exp(-s.height / 2.0)
    lam = s.scale
    h20 = _local_coeff(p, BubbleSeed(2, s.center, 0.0)) * 4.0  # rho2 h2 e^phi

    x1, x2 = g.coords()
    w = g.min_image(np.stack([x1 - center[0], x2 - center[1]], axis=-1))
    wc = (w[..., 0] + 1j * w[..., 1]) / eps
    ell = gf.log_distance_factor(center)
    y2abs = ell / eps**2                      # glued |y|^2, periodic
    # taper the shift inside r0 so y^2's seam discontinuity never matters
    r0 = 0.25 * min(g.lengths)
    for other in all_seeds:
        if other is s:
            continue
        d = np.hypot(*g.min_image(np.asarray(other.center) - center))
        r0 = min(r0, 0.4 * d)
    t = np.clip(np.abs(wc) * eps / r0, 0.0, 1.0)
    taper = 0.5 * (1.0 + np.cos(np.pi * t))
    xi_eff = s.shift * taper
    S = y2abs**2 - 2.0 * (wc**2 * np.conj(xi_eff)).real + np.abs(xi_eff) ** 2
    # u1 bubble caps the center dip at its own scale within the y chart
    lam1 = max((b.height for b in all_seeds
                if b.component == 1 and b.kind == "standard"), default=None)
    kappa_f = np.exp(-(lam1 - 2 * s.height) / 2) if lam1 is not None else 0.05
    kappa_f = float(np.clip(kappa_f, 2 * min(g.spacing) / eps * 0.5, 1.0))
    prof = np.log(lam) - np.log(2 * h20) - 2.0 * np.log1p((lam / 32.0) * S)
    prof += np.log(kappa_f**2 + y2abs) - 2.0 * np.log(eps)
    return prof


def seed_template(case: int, centers: list, heights: list,
                  p: SystemParams, **kwargs) -> CoupledState:
    """Assemble the case-1/2/3 seed per Theorem-level templates.

    case 1: centers = [q, p_1..p_N]; u1 bubble at q, u2 bubbles at p_l.
    case 2: centers = [q, p_3..p_N]; u1 bubble + singular u2 profile at q,
            heights = [lam1, lam2q, lam23..]; kwargs: shift, scale.
    case 3: centers = [q, p1, p2, p_3..p_N]; u1 bubble at q, u2 bubbles at
            p1, p2 (the colliding pair) and the far p_l.
    """
    if case == 1:
        seeds = [BubbleSeed(1, tuple(centers[0]), heights[0])]
        seeds += [BubbleSeed(2, tuple(c), h)
                  for c, h in zip(centers[1:], heights[1:])]
    elif case == 2:
        seeds = [BubbleSeed(1, tuple(centers[0]), heights[0]),
                 BubbleSeed(2, tuple(centers[0]), heights[1], kind="singular",
                            shift=kwargs.get("shift", 0.6 + 0.3j),
                            scale=kwargs.get("scale", 32.0))]
        seeds += [BubbleSeed(2, tuple(c), h)
                  for c, h in zip(centers[1:], heights[2:])]
    elif case == 3:
        seeds = [BubbleSeed(1, tuple(centers[0]), heights[0])]
        seeds += [BubbleSeed(2, tuple(c), h)
                  for c, h in zip(centers[1:], heights[1:])]
        # the colliding pair shares the u1 center's dip; nothing extra needed
    else:
        raise ValueError(f"unknown case template {case}")
    return seed_from_bubbles(seeds, p)
