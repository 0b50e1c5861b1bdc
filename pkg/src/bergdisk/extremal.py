"""Extremal functions with prescribed zeros and the patched-solver family g_a.

The search family is f = Psi_W * exp(q) with q a polynomial: the zero set of f
is exactly W, log|f(0)| is linear in q, and the norm constraint

    maximize  log|f(0)| = log|Psi_W(0)| + Re q(0)
    subject   ||f||_p = 1

is equivalent to maximizing the strictly concave functional

    J(q) = Re q(0) - (1/p) log int |Psi_W|^p e^{p Re q} dA,

whose stationarity conditions are the harmonic-evaluation identities

    int |f|^p u dA = u(0),  u in {1, Re z^k, Im z^k : k <= deg q}.

Those identities double as the module's primary correctness oracle: a
converged solution must reproduce them to quadrature precision.

A second, closed-form route exists for p = 2: relax the constraint to
"f vanishes on W" and search over f = G * g with G the normalized Blaschke
product and g a polynomial.  The optimum is a Gram-matrix linear solve, and g
is checked a posteriori to be zero-free on the truncated disk, so the zero set
of the solution is still exactly W.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize

from .geometry import PointSet, moebius, psi
from .quad import DiskGrid, build_grid
from .weights import k_Z, log_Psi, log_abs_Psi

# Degree used when re-expanding a Blaschke-times-polynomial solution in the
# exp(q) family; the tail is geometric in max|a| so 96 terms cover |a| <= 0.9.
CONVERSION_DEGREE = 96

GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class AnalyticModel:
    """f = Psi_W * exp(q), q a polynomial (coefficients in ascending order).

    exp(q) never vanishes, so the zero set of f is exactly W; all evaluation
    happens in log space.
    """

    zeros: PointSet
    expcoeffs: np.ndarray

    def __init__(self, zeros: PointSet, expcoeffs):
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(
            self, "expcoeffs", np.atleast_1d(np.asarray(expcoeffs, dtype=complex))
        )

    def q(self, z) -> np.ndarray:
        return npoly.polyval(np.asarray(z, dtype=complex), self.expcoeffs)

    def log(self, z) -> np.ndarray:
        """Complex log of f; real part is -inf exactly on the zero set."""
        return log_Psi(self.zeros, z) + self.q(z)

    def log_abs(self, z) -> np.ndarray:
        return log_abs_Psi(self.zeros, z) + np.real(self.q(z))

    def value(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.exp(self.log(z))
        for a in self.zeros.expanded():
            out = np.where(z == a, 0.0, out)
        return out

    def log_abs_origin(self) -> float:
        return float(log_abs_Psi(self.zeros, np.asarray(0j)) + np.real(self.expcoeffs[0]))

    def norm(self, p: float, grid: DiskGrid) -> float:
        la = self.log_abs(grid.nodes)
        return float(grid.integrate(np.exp(p * la)) ** (1 / p))

    def normalized(self, p: float, grid: DiskGrid) -> "AnalyticModel":
        """Rescale so the grid norm is exactly 1 (shifts the constant term)."""
        shift = np.log(self.norm(p, grid))
        c = self.expcoeffs.copy()
        c[0] -= shift
        return AnalyticModel(self.zeros, c)


def divide_out_zeros(f: AnalyticModel, drop: PointSet) -> AnalyticModel:
    """Division by Psi_drop: remove zeros, keep the exponent polynomial.

    Psi factors over the point set, so f / Psi_drop = Psi_{W minus drop} e^q
    exactly; renormalization is left to the caller.
    """
    return AnalyticModel(f.zeros.without(drop), f.expcoeffs.copy())


def blaschke_log(W: PointSet, z) -> np.ndarray:
    """Complex log of the normalized Blaschke product prod (conj(a)/|a|) M_a;
    positive at the origin."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape, dtype=complex)
    with np.errstate(divide="ignore"):
        for a in W.expanded():
            if a == 0:
                acc = acc + np.log(z.astype(complex))
            else:
                acc = acc + np.log((np.conj(a) / abs(a)) * moebius(a, z))
    return acc


def _series_log(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Power-series log of a polynomial with nonzero constant term."""
    g = np.zeros(degree + 1, dtype=complex)
    g[: min(len(coeffs), degree + 1)] = coeffs[: degree + 1]
    if g[0] == 0:
        raise ValueError("series log needs a nonzero constant term")
    L = np.zeros(degree + 1, dtype=complex)
    L[0] = np.log(g[0])
    for n in range(1, degree + 1):
        s = g[n]
        for k in range(1, n):
            s -= (k / n) * L[k] * g[n - k]
        L[n] = s / g[0]
    return L


def _blaschke_ratio_series(W: PointSet, degree: int) -> np.ndarray:
    """Taylor coefficients of log(G / Psi_W), an analytic zero-free ratio.

    Per factor, (conj(a)/|a|) M_a / E_a = exp(-(1-|a|^2)(1/2 + sum_k (conj(a) z)^k)),
    so the coefficients are c_0 = -sum (1-|a|^2)/2, c_k = -sum (1-|a|^2) conj(a)^k.
    """
    coeff = np.zeros(degree + 1, dtype=complex)
    for a in W.expanded():
        one = 1 - abs(a) ** 2
        coeff[0] -= one / 2
        if a != 0:
            k = np.arange(1, degree + 1)
            coeff[1:] -= one * np.conj(a) ** k
    return coeff


@dataclass
class ExtremalInfo:
    """Diagnostics attached to an extremal solve."""

    value_at_origin: float
    norm: float
    converged: bool
    iterations: int
    method: str
    gram_condition: float = np.nan
    extra_roots_inside: int = 0
    message: str = ""


def solve_extremal_p2(
    W: PointSet, degree: int, grid: DiskGrid
) -> tuple[AnalyticModel, ExtremalInfo]:
    """Closed-form relaxed p = 2 extremal over f = G * (polynomial of degree d).

    Maximizing |f(0)| under the quadratic constraint c^H A c <= 1 with
    A the Gram matrix of {G z^k} gives c* = A^{-1} e_0 / sqrt(e_0^H A^{-1} e_0).
    The polynomial factor is then verified to be zero-free on the truncated
    disk (a warning is issued otherwise) and the solution is re-expressed in
    the Psi_W exp(q) family via exact factor series.
    """
    if W.contains_point(0):
        raise ValueError("0 must not belong to W")
    z = grid.nodes
    with np.errstate(over="ignore"):
        absG2 = np.exp(2 * np.real(blaschke_log(W, z))) if len(W) else np.ones(z.shape)
    Bmat = np.vander(z, degree + 1, increasing=True)
    A = (Bmat.conj() * (grid.weights * absG2)[:, None]).T @ Bmat
    A = (A + A.conj().T) / 2
    cond = float(np.linalg.cond(A))
    if cond > GRAM_CONDITION_LIMIT:
        raise ValueError(f"Gram matrix ill-conditioned (cond {cond:.2e})")
    e0 = np.zeros(degree + 1)
    e0[0] = 1.0
    x = np.linalg.solve(A, e0)
    scale = np.sqrt(np.real(x[0]))
    c = x / scale
    G0 = float(np.prod(np.abs(W.expanded()))) if len(W) else 1.0
    value = G0 * abs(c[0])

    roots = np.roots(c[::-1]) if degree >= 1 else np.array([])
    inside = int(np.sum(np.abs(roots) <= grid.rmax))
    if inside:
        warnings.warn(f"{inside} extra polynomial roots inside |z| <= rmax")

    qcoef = _blaschke_ratio_series(W, CONVERSION_DEGREE)
    glog = _series_log(c, CONVERSION_DEGREE)
    n = max(len(qcoef), len(glog))
    q = np.zeros(n, dtype=complex)
    q[: len(qcoef)] += qcoef
    q[: len(glog)] += glog
    model = AnalyticModel(W, q).normalized(2.0, grid)
    info = ExtremalInfo(
        value_at_origin=value,
        norm=1.0,
        converged=True,
        iterations=0,
        method="gram",
        gram_condition=cond,
        extra_roots_inside=inside,
    )
    return model, info


def solve_extremal_general(
    W: PointSet,
    p: float,
    degree: int,
    grid: DiskGrid,
    tol: float = 1e-12,
    maxiter: int = 5000,
) -> tuple[AnalyticModel, ExtremalInfo]:
    """Maximize log|f(0)| over f = Psi_W exp(q), ||f||_p = 1, q of given degree.

    The reduced functional J is smooth and concave, so the solve is an
    unconstrained quasi-Newton maximization with analytic gradient; the
    imaginary part of q_0 is pinned to 0 (pure phase).  Deterministic: the
    iteration starts from q = 0 and uses no randomness.
    """
    if W.contains_point(0):
        raise ValueError("0 must not belong to W")
    if p <= 0:
        raise ValueError("p must be positive")
    z = grid.nodes
    logpsi = log_abs_Psi(W, z)
    powers_re = np.stack([np.real(z**k) for k in range(degree + 1)])
    powers_im = np.stack([np.imag(z**k) for k in range(1, degree + 1)])
    wgt = grid.weights

    def split(theta):
        return theta[: degree + 1], theta[degree + 1 :]

    def objective(theta):
        x, y = split(theta)
        re_q = x @ powers_re - y @ powers_im
        expo = p * (logpsi + re_q)
        mx = np.max(expo)
        dens = wgt * np.exp(expo - mx)
        I = dens.sum()
        logI = mx + np.log(I)
        rho = dens / I
        grad_x = np.array([np.sum(rho * powers_re[k]) for k in range(degree + 1)])
        grad_y = -np.array([np.sum(rho * powers_im[k]) for k in range(degree)])
        gx = np.zeros(degree + 1)
        gx[0] = 1.0
        grad = np.concatenate([gx - grad_x, -grad_y])
        J = x[0] - logI / p
        return -J, -grad

    theta0 = np.zeros(2 * degree + 1)
    res = minimize(
        objective,
        theta0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": maxiter, "ftol": 1e-16, "gtol": tol},
    )
    x, y = split(res.x)
    q = x.astype(complex)
    q[1:] += 1j * y
    model = AnalyticModel(W, q).normalized(p, grid)
    info = ExtremalInfo(
        value_at_origin=float(np.exp(model.log_abs_origin())),
        norm=1.0,
        converged=bool(res.success or np.max(np.abs(res.jac)) < 1e-8),
        iterations=int(res.nit),
        method="lbfgs",
        message="" if res.success else str(res.message),
    )
    return model, info


def harm_eval_check(f: AnalyticModel, p: float, kmax: int, grid: DiskGrid) -> np.ndarray:
    """Residuals of int |f|^p u dA = u(0) for u in {1} + {Re z^k, Im z^k, k <= kmax}.

    The residual for u = 1 is the norm defect; all others must vanish at a
    converged extremal solution.  Returns the residuals in that order.
    """
    dens = grid.weights * np.exp(p * f.log_abs(grid.nodes))
    out = [abs(dens.sum() - 1.0)]
    for k in range(1, kmax + 1):
        zk = grid.nodes**k
        out.append(abs(float(np.sum(dens * np.real(zk)))))
        out.append(abs(float(np.sum(dens * np.imag(zk)))))
    return np.asarray(out)


@dataclass
class GrowthReport:
    """Measured constants of the two growth inequalities, with rmax stability."""

    C: float
    C_prime: float
    C_by_rmax: tuple
    C_prime_by_rmax: tuple
    stable: bool
    rel_change: float


def growth_check(
    f: AnalyticModel,
    Z: PointSet,
    p: float,
    rmax_pair=(0.99, 0.995),
    n_radial: int = 96,
    stability_tol: float = 0.05,
) -> GrowthReport:
    """Suprema of |f|^p (1-|z|^2) and |f/Psi_Z|^p e^{p k_Z} (1-|z|^2).

    Both are evaluated on boundary-refined grids at two truncation radii; a
    relative change above 5 percent is flagged as unstable rather than raised.
    """
    Cs, Cps = [], []
    for rmax in rmax_pair:
        grid = build_grid(rmax, n_radial, boundary_depth=10)
        z = grid.nodes
        one = 1 - np.abs(z) ** 2
        la = f.log_abs(z)
        Cs.append(float(np.max(np.exp(p * la) * one)))
        la_ratio = la - log_abs_Psi(Z, z) + k_Z(Z, z)
        la_ratio = np.where(np.isnan(la_ratio), -np.inf, la_ratio)
        Cps.append(float(np.max(np.exp(p * la_ratio) * one)))
    rel = max(
        abs(Cs[1] - Cs[0]) / max(Cs[1], 1e-300),
        abs(Cps[1] - Cps[0]) / max(Cps[1], 1e-300),
    )
    return GrowthReport(Cs[1], Cps[1], tuple(Cs), tuple(Cps), rel <= stability_tol, rel)


@dataclass
class GaCenter:
    """One member of the g_a family, stored pre-composition.

    g_a(z) = exp(q(M_a z) + h(M_a z)) where exp(q) solves the extremal problem
    for the shifted set and Re h fits the harmonic gap k_{Z_a} - k_Z o M_a.
    """

    center: complex
    qcoeffs: np.ndarray
    hcoeffs: np.ndarray
    dropped: tuple
    delta: float
    C: float
    fit_residual: float
    ok: bool
    message: str = ""

    def log_g(self, z) -> np.ndarray:
        w = moebius(self.center, np.asarray(z, dtype=complex))
        return npoly.polyval(w, self.qcoeffs) + npoly.polyval(w, self.hcoeffs)

    def g(self, z) -> np.ndarray:
        return np.exp(self.log_g(z))


@dataclass
class GaFamily:
    """The analytic patch family of the solution operator."""

    centers: list
    Z: PointSet
    p: float
    lam: float
    eta: float

    @property
    def eps(self) -> float:
        return 1 - self.lam

    def __len__(self) -> int:
        return len(self.centers)

    def flagged(self) -> list:
        return [c for c in self.centers if not c.ok]


def constant_family(net, Z: PointSet, p: float, value: float = 1.0) -> GaFamily:
    """Family of constant functions (the Z = empty degenerate case)."""
    centers = [
        GaCenter(
            complex(a),
            np.array([np.log(value)], dtype=complex),
            np.zeros(1, dtype=complex),
            (),
            value,
            value**p,
            0.0,
            True,
        )
        for a in net.centers.points
    ]
    return GaFamily(centers, Z, p, 0.9, net.eta)


def fit_harmonic_polynomial(values: np.ndarray, z: np.ndarray, degree: int):
    """Least-squares fit of Re h(z) to given harmonic samples, h polynomial.

    Returns (coefficients, rms residual).  The imaginary part of h_0 is pinned
    to zero; the conjugate is whatever the fit produces.
    """
    cols = [np.real(z**k) for k in range(degree + 1)]
    cols += [-np.imag(z**k) for k in range(1, degree + 1)]
    Amat = np.stack(cols, axis=1)
    sol, *_ = np.linalg.lstsq(Amat, values, rcond=None)
    coeffs = sol[: degree + 1].astype(complex)
    coeffs[1:] += 1j * sol[degree + 1 :]
    resid = float(np.sqrt(np.mean((Amat @ sol - values) ** 2)))
    return coeffs, resid


def build_ga_family(
    Z: PointSet,
    p: float,
    net,
    r_drop: float,
    degree: int,
    grid: DiskGrid,
    lam: float = 0.9,
    fit_degree: int = 10,
) -> GaFamily:
    """Construct g_a for every net center by the shift / drop / extremal chain.

    Per center a: shift Z by M_a, drop the (at most one, for r_drop at most
    the separation constant) points inside D(0, r_drop), solve the extremal
    problem at exponent p/lam on the remaining set, divide out the zeros, fit
    the harmonic correction, and compose back with M_a.  Constants delta (the
    lower bound on D(a, eta)) and C (the growth bound with eps = 1 - lam) are
    measured on the grid, not assumed.  Per-center failures are recorded and
    the family is returned with those centers flagged.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    centers = []
    z_nodes = grid.nodes
    fit_mask = np.abs(z_nodes) <= 0.9 * grid.rmax
    z_fit = z_nodes[fit_mask]
    kz_all = k_Z(Z, z_nodes)
    for a in net.centers.points:
        a = complex(a)
        try:
            Za = Z.transform(a)
            near = [
                (pt, m)
                for pt, m in zip(Za.points, Za.multiplicities)
                if abs(pt) < r_drop
            ]
            dropped = PointSet([q for q, _ in near], [m for _, m in near])
            Wa = Za.without(dropped) if len(dropped) else Za
            model, info = solve_extremal_general(Wa, p / lam, degree, grid)
            g0 = divide_out_zeros(model, Wa)
            gap = k_Z(Za, z_fit) - k_Z(Z, moebius(a, z_fit))
            hco, resid = fit_harmonic_polynomial(gap, z_fit, fit_degree)
            entry = GaCenter(
                a, g0.expcoeffs, hco, tuple(dropped.points), 0.0, 0.0, resid,
                info.converged, info.message,
            )
            amp = np.exp(np.real(entry.log_g(z_nodes)) + kz_all)
            near_mask = psi(z_nodes, a) < net.eta
            entry.delta = float(np.min(amp[near_mask])) if near_mask.any() else 0.0
            decay = (1 - np.abs(moebius(a, z_nodes)) ** 2) ** (1 - (1 - lam))
            entry.C = float(np.max(amp**p * decay))
            centers.append(entry)
        except (ValueError, np.linalg.LinAlgError) as exc:
            centers.append(
                GaCenter(
                    a, np.zeros(1, complex), np.zeros(1, complex), (), 0.0, 0.0,
                    np.inf, False, str(exc),
                )
            )
    return GaFamily(centers, Z, p, lam, net.eta)
