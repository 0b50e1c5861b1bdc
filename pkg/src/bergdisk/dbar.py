"""Solvers for (1 - |z|^2) dbar u = f with weighted norm reports.

Two routes:

  * solve_plain: the modified Cauchy kernel applied to phi = f/(1-|w|^2); the
    textbook solution, with no control of weighted norms near the boundary.
  * solve_patched: the patched operator

      u(z) = (1/pi) sum_j g_j(z) int beta_j(w) f(w) / g_j(w)
                 (1-|w|^2)^{m-1} / ((z-w)(1 - conj(w) z)^m) dA(w)

    built from a covering partition of unity and the analytic family g_j.
    Summing the patches under the integral gives a single kernel with the
    diagonal value f(z)/(1-|z|^2), so the same singularity subtraction as the
    plain solver applies and the whole sum is evaluated in one quadrature
    pass per output point.

dbar is the standard Wirtinger derivative; the equation as printed in the
source convention differs by a constant factor absorbed into u.  Residuals
are measured by central differences: with step h,

    dbar u ~ [u(z+h) - u(z-h) + i(u(z+ih) - u(z-ih))] / (4h).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .extremal import GaFamily
from .geometry import CoveringNet, psi
from .quad import DiskGrid, build_grid, lp_norm
from .weights import Psi, k_Z

DEFAULT_RESIDUAL_TOL = 5e-3
_FD_STEP = 0.015


def smoothstep_down(t):
    """C^2 ramp: 1 for t <= 0, 0 for t >= 1, quintic in between."""
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t**3 * (10 - 15 * t + 6 * t**2)


def smoothstep_down_deriv(t):
    out = np.zeros_like(np.asarray(t, dtype=float))
    inside = (t > 0) & (t < 1)
    ti = np.asarray(t)[inside]
    out[inside] = -30 * ti**2 * (1 - ti) ** 2
    return out


@dataclass
class PartitionOfUnity:
    """Normalized bumps beta_j = b_j / sum_k b_k subordinate to D(a_j, eta).

    Raw bumps are 1 on D(a_j, eta/2), vanish off D(a_j, eta), and ramp as a
    quintic in psi(a_j, .).  Bumps are evaluated on demand so the partition
    works at arbitrary points, not just grid nodes.
    """

    net: CoveringNet
    grid: DiskGrid
    samples: np.ndarray = field(repr=False, default=None)

    def raw(self, j: int, z) -> np.ndarray:
        a = self.net.centers.points[j]
        eta = self.net.eta
        return smoothstep_down((psi(np.asarray(z, dtype=complex), a) - eta / 2) / (eta / 2))

    def raw_all(self, z) -> np.ndarray:
        """Matrix of raw bumps, shape (n_centers, len(z))."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.stack([self.raw(j, z) for j in range(len(self.net.centers))])

    def beta_all(self, z) -> np.ndarray:
        raw = self.raw_all(z)
        total = raw.sum(axis=0)
        if np.any(total == 0):
            raise ValueError("partition has a coverage hole at a requested point")
        return raw / total

    def support_indices(self, j: int) -> np.ndarray:
        return np.nonzero(self.samples[j] > 0)[0]


def build_partition(net: CoveringNet, grid: DiskGrid) -> PartitionOfUnity:
    """Sample and normalize the bumps; errors on any coverage hole inside the
    net region."""
    part = PartitionOfUnity(net, grid)
    raw = part.raw_all(grid.nodes)
    covered = np.abs(grid.nodes) <= net.rmax
    total = raw.sum(axis=0)
    if np.any(total[covered] == 0):
        raise ValueError("coverage hole: some covered grid node has no active bump")
    part.samples = raw
    return part


def partition_gradient_stat(part: PartitionOfUnity, h: float = 1e-4) -> float:
    """Measured sup over centers of |grad beta_j| (1 - |a_j|), by differences."""
    sup = 0.0
    nodes = part.grid.nodes
    inner = np.abs(nodes) < part.net.rmax * 0.98
    probe = nodes[inner][:: max(1, inner.sum() // 2000)]
    for j, a in enumerate(part.net.centers.points):
        near = probe[psi(probe, a) < part.net.eta * 1.05]
        if len(near) == 0:
            continue
        bx = (part.beta_all(near + h)[j] - part.beta_all(near - h)[j]) / (2 * h)
        by = (part.beta_all(near + 1j * h)[j] - part.beta_all(near - 1j * h)[j]) / (2 * h)
        g = np.sqrt(bx**2 + by**2)
        sup = max(sup, float(np.max(g) * (1 - abs(a))))
    return sup


@dataclass
class SolverReport:
    """Record of one dbar solve: residual and weighted norm bookkeeping."""

    residual_ratio: float
    input_norm: float
    solution_norm: float
    bound_ratio: float
    p: float
    n_points: int
    m: int
    grid_size: int
    method: str
    success: bool
    message: str = ""


def dbar_fd(u_fn, z, h: float = _FD_STEP) -> np.ndarray:
    """Central-difference Wirtinger dbar of a callable at the points z."""
    z = np.asarray(z, dtype=complex)
    return (
        u_fn(z + h) - u_fn(z - h) + 1j * (u_fn(z + 1j * h) - u_fn(z - 1j * h))
    ) / (4 * h)


def residual(u_fn, f_fn, grid: DiskGrid, h: float = _FD_STEP, max_probes: int = 600) -> float:
    """|| (1-|z|^2) dbar u - f ||_2 / ||f||_2 over interior probe nodes.

    Probes keep a stencil-width margin from the rim and are thinned
    deterministically to max_probes; zero input with zero defect reports 0.
    """
    keep = np.abs(grid.nodes) <= grid.rmax - 2 * h
    stride = max(1, int(keep.sum()) // max_probes)
    probes = grid.nodes[keep][::stride]
    wgt = grid.weights[keep][::stride]
    defect = (1 - np.abs(probes) ** 2) * dbar_fd(u_fn, probes, h) - f_fn(probes)
    num = float(np.sqrt(np.sum(wgt * np.abs(defect) ** 2)))
    den = float(np.sqrt(np.sum(wgt * np.abs(f_fn(probes)) ** 2)))
    if den == 0:
        return 0.0 if num == 0 else np.inf
    return num / den


def _plain_evaluator(f_fn, m: int, grid: DiskGrid):
    w = grid.nodes
    wgt = grid.weights
    fw = np.asarray(f_fn(w), dtype=complex)
    phi_w = fw / (1 - np.abs(w) ** 2)
    one_m = (1 - np.abs(w) ** 2) ** m

    def u_fn(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape, dtype=complex)
        phi_z = np.asarray(f_fn(z), dtype=complex) / (1 - np.abs(z) ** 2)
        block = max(1, int(2e6 // max(len(w), 1)))
        for i0 in range(0, len(z), block):
            zb = z[i0 : i0 + block, None]
            G = phi_w[None, :] * one_m[None, :] / (1 - np.conj(w)[None, :] * zb) ** m
            dz = zb - w[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                term = np.where(
                    dz == 0, 0.0, (G - phi_z[i0 : i0 + block, None]) / np.where(dz == 0, 1.0, dz)
                )
            out[i0 : i0 + block] = term @ wgt
        return out / np.pi + phi_z * np.conj(z)

    return u_fn


def solve_plain(
    f_fn,
    m: int,
    Z,
    grid: DiskGrid,
    p: float = 2.0,
    eval_grid: DiskGrid | None = None,
    tol: float = DEFAULT_RESIDUAL_TOL,
):
    """Plain Cauchy-kernel solve; returns (samples on eval grid, u_fn, report)."""
    if eval_grid is None:
        eval_grid = build_grid(grid.rmax * 0.97, max(grid.n_radial // 6, 12))
    u_fn = _plain_evaluator(f_fn, m, grid)
    u_samples = u_fn(eval_grid.nodes)
    res = residual(u_fn, f_fn, eval_grid)
    fnorm = lp_norm(f_fn, Z, p, eval_grid)
    unorm = lp_norm(u_samples, Z, p, eval_grid)
    report = SolverReport(
        residual_ratio=res,
        input_norm=fnorm,
        solution_norm=unorm,
        bound_ratio=unorm / fnorm if fnorm > 0 else 0.0,
        p=p,
        n_points=len(Z) if Z is not None else 0,
        m=m,
        grid_size=len(grid),
        method="plain",
        success=bool(res <= tol),
        message="" if res <= tol else f"residual {res:.2e} above tolerance",
    )
    return u_samples, u_fn, report


def _patched_evaluator(f_fn, family: GaFamily, part: PartitionOfUnity, m: int, grid: DiskGrid):
    """Evaluator for the patched operator, one subtraction pass per point block.

    The patch kernel P(z, w) = sum_j g_j(z) beta_j(w) / g_j(w) is assembled
    from rank-one blocks restricted to each bump's support; its diagonal is
    f(z)/(1-|z|^2) wherever the partition sums to one, which is exactly the
    subtraction constant of the plain kernel.
    """
    w = grid.nodes
    wgt = grid.weights
    fw = np.asarray(f_fn(w), dtype=complex)
    raw = part.raw_all(w)
    total = raw.sum(axis=0)
    active = [j for j in range(len(family)) if np.any((raw[j] > 0) & (fw != 0))]
    for j in active:
        if not family.centers[j].ok:
            raise ValueError(f"needed family center {j} is flagged as failed")
    supports = {j: np.nonzero(raw[j] > 0)[0] for j in active}
    ratio = {}
    for j in active:
        idx = supports[j]
        beta_w = raw[j][idx] / total[idx]
        ratio[j] = beta_w * fw[idx] / family.centers[j].g(w[idx])
    one_m1 = (1 - np.abs(w) ** 2) ** (m - 1)

    def u_fn(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape, dtype=complex)
        phi_z = np.asarray(f_fn(z), dtype=complex) / (1 - np.abs(z) ** 2)
        block = max(1, int(2e6 // max(len(w), 1)))
        for i0 in range(0, len(z), block):
            zb = z[i0 : i0 + block]
            P = np.zeros((len(zb), len(w)), dtype=complex)
            for j in active:
                idx = supports[j]
                P[:, idx] += np.outer(family.centers[j].g(zb), ratio[j])
            G = P * (one_m1[None, :] / (1 - np.conj(w)[None, :] * zb[:, None]) ** m)
            dz = zb[:, None] - w[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                term = np.where(
                    dz == 0, 0.0, (G - phi_z[i0 : i0 + block, None]) / np.where(dz == 0, 1.0, dz)
                )
            out[i0 : i0 + block] = term @ wgt
        return out / np.pi + phi_z * np.conj(z)

    return u_fn


def solve_patched(
    f_fn,
    Z,
    p: float,
    family: GaFamily,
    part: PartitionOfUnity,
    m: int,
    grid: DiskGrid,
    eval_grid: DiskGrid | None = None,
    tol: float = DEFAULT_RESIDUAL_TOL,
):
    """Patched solve; family centers must coincide with the partition net."""
    fam_centers = np.asarray([c.center for c in family.centers])
    if len(fam_centers) != len(part.net.centers) or np.any(
        fam_centers != part.net.centers.points
    ):
        raise ValueError("family centers do not match partition net centers")
    if eval_grid is None:
        eval_grid = build_grid(grid.rmax * 0.97, max(grid.n_radial // 6, 12))
    u_fn = _patched_evaluator(f_fn, family, part, m, grid)
    u_samples = u_fn(eval_grid.nodes)
    res = residual(u_fn, f_fn, eval_grid)
    fnorm = lp_norm(f_fn, Z, p, eval_grid)
    unorm = lp_norm(u_samples, Z, p, eval_grid)
    report = SolverReport(
        residual_ratio=res,
        input_norm=fnorm,
        solution_norm=unorm,
        bound_ratio=unorm / fnorm if fnorm > 0 else 0.0,
        p=p,
        n_points=len(Z) if Z is not None else 0,
        m=m,
        grid_size=len(grid),
        method="patched",
        success=bool(res <= tol),
        message="" if res <= tol else f"residual {res:.2e} above tolerance",
    )
    return u_samples, u_fn, report
