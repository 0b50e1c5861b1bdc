"""Quadrature over truncated disks and the integral transforms built on it.

Grid design: midpoint rule on cells that tile [0, rmax^2] x [0, 2pi) in the
(s, theta) coordinates with s = r^2, so dA = (1/2) ds dtheta and the cell
weights add up to pi rmax^2 exactly.  Cells near declared singular points are
subdivided dyadically, graded so the cell diameter stays below the distance to
the singularity (ratio-2 rings); cells near the outer rim can be split
geometrically toward rmax for boundary-concentrated integrands.

Convention: dbar is the standard Wirtinger derivative (d/dx + i d/dy)/2.  The
modified Cauchy kernels (1-|w|^2)^m / ((z-w)(1 - conj(w) z)^m) then satisfy
dbar_z v = phi exactly, for every m >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import PointSet, PseudoDisk, psi
from .weights import k_Z

# Subdivision stops once cells are this small relative to 1 - |singular point|.
_REFINE_FLOOR = 1e-6


@dataclass
class DiskGrid:
    """Midpoint quadrature nodes and exact-tiling area weights on {|z| <= rmax}."""

    nodes: np.ndarray
    weights: np.ndarray
    rmax: float
    n_radial: int
    n_theta: int
    singular_points: tuple = ()
    depth: int = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> complex:
        values = np.asarray(values)
        return np.sum(self.weights * values)


def build_grid(
    rmax: float,
    n_radial: int,
    singular_points=(),
    depth: int = 4,
    n_theta: int | None = None,
    boundary_depth: int = 0,
) -> DiskGrid:
    """Polar midpoint grid with graded refinement around each singular point.

    Parameters
    ----------
    rmax : truncation radius, strictly below 1.
    n_radial : number of uniform cells in s = r^2; at least 4.
    singular_points : points where integrands may behave like 1/|z - w|;
        nearby cells are split until their diameter drops below the distance
        to the point (or below the 1e-6 (1-|point|) floor).
    depth : maximum number of dyadic subdivision passes.
    n_theta : angular cell count, defaults to 4 * n_radial.
    boundary_depth : extra geometric splits of the outermost radial cell,
        for integrands concentrating at |w| = rmax.
    """
    if not 0.0 < rmax < 1.0:
        raise ValueError("rmax must lie in (0, 1)")
    if n_radial < 4:
        raise ValueError("n_radial must be at least 4")
    if n_theta is None:
        n_theta = 4 * n_radial
    singular_points = tuple(complex(p) for p in singular_points)

    s_edges = list(np.linspace(0.0, rmax**2, n_radial + 1))
    for _ in range(boundary_depth):
        a, b = s_edges[-2], s_edges[-1]
        s_edges.insert(-1, (a + b) / 2)
    s_edges = np.asarray(s_edges)
    t_edges = np.linspace(0.0, 2 * np.pi, n_theta + 1)

    s0 = np.repeat(s_edges[:-1], n_theta)
    s1 = np.repeat(s_edges[1:], n_theta)
    t0 = np.tile(t_edges[:-1], len(s_edges) - 1)
    t1 = np.tile(t_edges[1:], len(s_edges) - 1)

    if singular_points:
        floor = _REFINE_FLOOR * min(1 - abs(p) for p in singular_points)
        for _ in range(depth):
            rc = np.sqrt((s0 + s1) / 2)
            node = rc * np.exp(1j * (t0 + t1) / 2)
            r_hi = np.sqrt(s1)
            diam = np.hypot(r_hi - np.sqrt(s0), r_hi * (t1 - t0))
            dist = np.full(len(s0), np.inf)
            for p in singular_points:
                dist = np.minimum(dist, np.abs(node - p))
            split = (diam > dist) & (diam > floor)
            if not np.any(split):
                break
            ks0, ks1, kt0, kt1 = s0[~split], s1[~split], t0[~split], t1[~split]
            bs0, bs1, bt0, bt1 = s0[split], s1[split], t0[split], t1[split]
            sm = (bs0 + bs1) / 2
            tm = (bt0 + bt1) / 2
            s0 = np.concatenate([ks0, bs0, sm, bs0, sm])
            s1 = np.concatenate([ks1, sm, bs1, sm, bs1])
            t0 = np.concatenate([kt0, bt0, bt0, tm, tm])
            t1 = np.concatenate([kt1, tm, tm, bt1, bt1])

    r = np.sqrt((s0 + s1) / 2)
    nodes = r * np.exp(1j * (t0 + t1) / 2)
    weights = (s1 - s0) * (t1 - t0) / 2
    return DiskGrid(nodes, weights, rmax, n_radial, n_theta, singular_points, depth)


def sample_on(f, grid: DiskGrid) -> np.ndarray:
    """Evaluate a callable on the grid nodes, or pass through aligned samples."""
    if callable(f):
        return np.asarray(f(grid.nodes))
    values = np.asarray(f)
    if values.shape != grid.nodes.shape:
        raise ValueError("sampled values are not aligned with the grid")
    return values


def grid_dump(grid: DiskGrid, path) -> None:
    """Write 're im weight' per line (text fixture format)."""
    with open(path, "w") as fh:
        fh.write(f"# rmax={grid.rmax!r} n_radial={grid.n_radial} n_theta={grid.n_theta}\n")
        for z, w in zip(grid.nodes, grid.weights):
            fh.write(f"{z.real!r} {z.imag!r} {w!r}\n")


def grid_restore(path) -> DiskGrid:
    nodes, weights = [], []
    rmax, n_radial, n_theta = 0.0, 0, 0
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, val = tok.split("=")
                    if key == "rmax":
                        rmax = float(val)
                    elif key == "n_radial":
                        n_radial = int(val)
                    elif key == "n_theta":
                        n_theta = int(val)
                continue
            x, y, w = line.split()
            nodes.append(complex(float(x), float(y)))
            weights.append(float(w))
    return DiskGrid(np.asarray(nodes), np.asarray(weights), rmax, n_radial, n_theta)


def lp_norm(f, Z: PointSet | None, p: float, grid: DiskGrid) -> float:
    """Weighted norm (integral of |f e^{k_Z}|^p dA)^{1/p}; Z = None or empty
    gives the plain L^p norm."""
    if p <= 0:
        raise ValueError("p must be positive")
    values = sample_on(f, grid)
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite samples in lp_norm")
    amp = np.abs(values)
    if Z is not None and len(Z):
        amp = amp * np.exp(k_Z(Z, grid.nodes))
    return float(grid.integrate(amp**p) ** (1.0 / p))


def cauchy_transform(phi, m: int, z, grid: DiskGrid):
    """(1/pi) integral of phi(w) (1-|w|^2)^m / ((z-w)(1 - conj(w) z)^m) dA(w).

    The 1/(z-w) singularity is removed by subtracting phi(z)/(z-w) and adding
    back its exact transform over the truncated disk, which is conj(z) for
    |z| < rmax.  phi must be callable (it is evaluated at z as well as at the
    nodes); the remaining integrand is bounded, so no per-z regridding is
    needed.
    """
    if m < 0:
        raise ValueError("kernel power m must be nonnegative")
    if not callable(phi):
        raise ValueError("cauchy_transform needs phi as a callable")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zs = np.atleast_1d(z)
    if np.any(np.abs(zs) >= grid.rmax):
        raise ValueError("evaluation point outside grid coverage")
    w = grid.nodes
    wgt = grid.weights
    phi_w = np.asarray(phi(w), dtype=complex)
    phi_z = np.asarray(phi(zs), dtype=complex)
    one_w = (1 - np.abs(w) ** 2) ** m
    out = np.empty(zs.shape, dtype=complex)
    block = max(1, int(2e6 // max(len(w), 1)))
    for i0 in range(0, len(zs), block):
        zb = zs[i0 : i0 + block, None]
        G = phi_w[None, :] * one_w[None, :] / (1 - np.conj(w)[None, :] * zb) ** m
        dz = zb - w[None, :]
        num = G - phi_z[i0 : i0 + block, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(dz == 0, 0.0, num / np.where(dz == 0, 1.0, dz))
        out[i0 : i0 + block] = term @ wgt
    out = out / np.pi + phi_z * np.conj(zs)
    return complex(out[0]) if scalar else out


def _fr_integrand(beta: float, M: float, variant: str, z: complex):
    if variant == "plain":
        def fn(w):
            return (1 - np.abs(w) ** 2) ** beta / np.abs(1 - np.conj(w) * z) ** (M + 2)
    elif variant == "singular":
        def fn(w):
            return (1 - np.abs(w) ** 2) ** beta / (
                np.abs(z - w) * np.abs(1 - np.conj(w) * z) ** (M + 1)
            )
    else:
        raise ValueError("variant must be 'plain' or 'singular'")
    return fn


def forelli_rudin_integral(
    beta: float,
    M: float,
    variant: str,
    z: complex,
    n_radial: int = 96,
    depth: int = 12,
    rmax: float = 0.99995,
    boundary_depth: int = 16,
) -> float:
    """One growth-kernel integral over the truncated disk, with refinement at
    the kernel peak near z and geometric boundary cells for (1-|w|^2)^beta."""
    grid = build_grid(
        rmax,
        n_radial,
        singular_points=(z,),
        depth=depth,
        boundary_depth=boundary_depth,
    )
    return float(grid.integrate(_fr_integrand(beta, M, variant, complex(z))(grid.nodes)))


def forelli_rudin_check(
    beta: float,
    M: float,
    variant: str = "plain",
    moduli=(0.9, 0.95, 0.99, 0.995),
    **kwargs,
):
    """Fit log(integral) against log(1-|z|^2); the slope estimates beta - M.

    Valid for -1 < beta < M.  Returns (slope, moduli, integrals).
    """
    if not (-1.0 < beta < M):
        raise ValueError("need -1 < beta < M")
    vals = np.array(
        [forelli_rudin_integral(beta, M, variant, rho, **kwargs) for rho in moduli]
    )
    x = np.log(1 - np.asarray(moduli) ** 2)
    slope = float(np.polyfit(x, np.log(vals), 1)[0])
    return slope, np.asarray(moduli), vals


@dataclass(frozen=True)
class LocalMeanSpec:
    """Exponent and pseudo-hyperbolic radius for local means."""

    q: float
    R: float

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if not 0.0 < self.R < 1.0:
            raise ValueError("R must lie in (0, 1)")


def _require_disk_coverage(disk: PseudoDisk, grid: DiskGrid) -> None:
    reach = abs(disk.euclidean_center) + disk.euclidean_radius
    if reach > grid.rmax:
        raise ValueError("pseudo-hyperbolic disk exceeds grid coverage")


def local_mean(f, spec: LocalMeanSpec, z, grid: DiskGrid) -> float:
    """m_q(f, z): the L^q average of f over D(z, R), normalized by the sampled
    area so constants are reproduced exactly."""
    disk = PseudoDisk(complex(z), spec.R)
    _require_disk_coverage(disk, grid)
    mask = psi(grid.nodes, complex(z)) < spec.R
    area = np.sum(grid.weights[mask])
    if area == 0:
        raise ValueError("no grid nodes inside the local disk")
    values = sample_on(f, grid)
    return float(
        (np.sum(grid.weights[mask] * np.abs(values[mask]) ** spec.q) / area)
        ** (1.0 / spec.q)
    )


def discrete_norm(f, spec: LocalMeanSpec, p: float, net, grid: DiskGrid) -> float:
    """sum_k (1-|z_k|^2)^2 m_q(f, z_k)^p over the net centers.

    Centers whose disks poke outside the grid are skipped (desk truncation).
    """
    if p <= 0:
        raise ValueError("p must be positive")
    total = 0.0
    for c in net.centers.points:
        try:
            mq = local_mean(f, spec, c, grid)
        except ValueError:
            continue
        total += (1 - abs(c) ** 2) ** 2 * mq**p
    return total


def full_disk_integral(
    fn, n_radial: int = 128, rmax_pair=(0.99, 0.995), **grid_kwargs
) -> float:
    """Richardson extrapolation to rmax -> 1 of a truncated disk integral,
    linear in t = 1 - rmax^2 (weights blow up only polynomially)."""
    vals, ts = [], []
    for rmax in rmax_pair:
        grid = build_grid(rmax, n_radial, **grid_kwargs)
        vals.append(float(np.real(grid.integrate(fn(grid.nodes)))))
        ts.append(1 - rmax**2)
    (t1, t2), (v1, v2) = ts, vals
    return v2 + (v2 - v1) * t2 / (t1 - t2)
