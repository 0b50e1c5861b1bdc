"""Seip-type densities and their Laplacian / smoothing reformulations.

Three equivalent ways to measure the density of Z against the exponent p:

  * point counts: D+(Z, r) sums (1-|a|^2)/2 over M_b(Z) inside |a| < r,
    normalized by log(1/(1-r^2)), sup over Moebius centers b;
  * circle means: the numerator is replaced by the angular mean of k_Z, which
    has the closed form (r^2/2) sum_a (1-|a|^2)^2/(1 - |a|^2 r^2);
  * Laplacian averages: by Green's formula (with lap = dz dzbar),

        (1/2pi) int k(r e^{it}) dt = (1/pi) int_{|z|<r} lap k log(r^2/|z|^2) dA,

    and log(1/(1-r^2)) = (1/pi) int_{|z|<r} (1-|z|^2)^{-2} log(r^2/|z|^2) dA
    exactly, which pins the Laplacian normalization convention-free.

The weight phi = log(1/(1-|z|^2)) - p k_Z feeds the invariant convolution
phi_* against the rotation-invariant kernel log(r*^2/|z|^2) on D(., r*); the
criterion margin is positive exactly when (1-|z|^2)^2 lap phi_* stays above 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PointSet, PseudoDisk, moebius
from .quad import DiskGrid, build_grid
from .weights import k_Z, lap_kZ


def log_denominator(r: float) -> float:
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    return float(np.log(1.0 / (1.0 - r**2)))


def dplus(Z: PointSet, r: float, centers: PointSet, variant: str = "halfdiff") -> float:
    """Point-count density at radius r, sup over the given Moebius centers.

    variant 'halfdiff' uses sum (1-|a|^2)/2 over |a| < r; 'logcount' uses the
    original sum of log(1/|a|) over 1/2 < |a| < r.  The two differ by O(1) in
    the numerator.
    """
    den = log_denominator(r)
    if len(Z) == 0:
        return 0.0
    best = 0.0
    cpts = centers.points if len(centers) else np.array([0j])
    for b in cpts:
        w = np.abs(moebius(b, Z.expanded()))
        if variant == "halfdiff":
            num = float(np.sum((1 - w[w < r] ** 2) / 2))
        elif variant == "logcount":
            sel = (w > 0.5) & (w < r)
            num = float(np.sum(np.log(1.0 / w[sel])))
        else:
            raise ValueError("variant must be 'halfdiff' or 'logcount'")
        best = max(best, num / den)
    return best


def splus_circle_mean(Z: PointSet, r: float) -> float:
    """Angular mean of k_Z on |z| = r: (r^2/2) sum (1-|a|^2)^2/(1-|a|^2 r^2)."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if len(Z) == 0:
        return 0.0
    mods2 = np.abs(Z.expanded()) ** 2
    return float(r**2 / 2 * np.sum((1 - mods2) ** 2 / (1 - mods2 * r**2)))


def seip_criterion_means(Z: PointSet, p: float, r: float, centers: PointSet) -> float:
    """Margin 1 - p sup_w mean(k_{M_w Z}) / log(1/(1-r^2)); positive means the
    interpolation criterion holds at this radius and center set."""
    den = log_denominator(r)
    if len(Z) == 0:
        return 1.0
    cpts = centers.points if len(centers) else np.array([0j])
    worst = max(splus_circle_mean(Z.transform(b), r) for b in cpts)
    return 1.0 - p * worst / den


def _log_weight_grid(rstar: float, n_radial: int = 48, depth: int = 10) -> DiskGrid:
    return build_grid(rstar, n_radial, singular_points=(0j,), depth=depth)


def seip_criterion_laplace(
    Z: PointSet,
    p: float,
    rstar: float,
    centers: PointSet,
    n_radial: int = 48,
) -> float:
    """Margin of the Laplacian-average criterion at radius rstar.

    Left side: p int_{|z|<rstar} lap k_{M_w Z}(z) log(rstar^2/|z|^2) dA;
    right side at eps = 0: pi log(1/(1-rstar^2)), exact under lap = dz dzbar.
    Margin is the worst (smallest) over the centers.
    """
    rhs = np.pi * log_denominator(rstar)
    if len(Z) == 0:
        return 1.0
    grid = _log_weight_grid(rstar, n_radial)
    logw = np.log(rstar**2 / np.abs(grid.nodes) ** 2)
    worst = -np.inf
    cpts = centers.points if len(centers) else np.array([0j])
    for b in cpts:
        lhs = p * float(grid.integrate(lap_kZ(Z.transform(b), grid.nodes) * logw))
        worst = max(worst, lhs)
    return 1.0 - worst / rhs


@dataclass
class PhiField:
    """phi = log(1/(1-|z|^2)) - p k_Z with its smoothing radius rstar."""

    Z: PointSet
    p: float
    rstar: float
    rmax: float = 0.999

    def phi(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.log(1.0 / (1.0 - np.abs(z) ** 2)) - self.p * k_Z(self.Z, z)

    def lap_phi(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (1.0 - np.abs(z) ** 2) ** -2 - self.p * lap_kZ(self.Z, z)

    def invariant_lap_phi(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return 1.0 - self.p * (1 - np.abs(z) ** 2) ** 2 * lap_kZ(self.Z, z)


def _check_smoothing_coverage(field: PhiField, w) -> None:
    for wc in np.atleast_1d(np.asarray(w, dtype=complex)):
        disk = PseudoDisk(complex(wc), field.rstar)
        if abs(disk.euclidean_center) + disk.euclidean_radius > field.rmax:
            raise ValueError("smoothing disk exceeds the field's coverage radius")


def phi_star(field: PhiField, w, vgrid: DiskGrid | None = None) -> np.ndarray:
    """Invariant convolution of phi with log(rstar^2/|z|^2) on D(w, rstar).

    Computed in Moebius-shifted coordinates z = M_w(v) over a fixed grid on
    |v| < rstar, self-normalized by the quadrature mass of the kernel so that
    constants are smoothed to themselves exactly (the analytic mass is
    pi log(1/(1-rstar^2))).
    """
    _check_smoothing_coverage(field, w)
    if vgrid is None:
        vgrid = _log_weight_grid(field.rstar)
    v = vgrid.nodes
    kernel = vgrid.weights * np.log(field.rstar**2 / np.abs(v) ** 2) / (1 - np.abs(v) ** 2) ** 2
    mass = kernel.sum()
    w_arr = np.atleast_1d(np.asarray(w, dtype=complex))
    out = np.empty(w_arr.shape)
    for i, wc in enumerate(w_arr):
        out[i] = float(np.sum(kernel * field.phi(moebius(wc, v)))) / mass
    return out[0] if np.asarray(w).ndim == 0 else out


@dataclass
class PhiStarLaplacianReport:
    """Extremes of (1-|z|^2)^2 lap phi_* over an interior subgrid."""

    min_val: float
    max_val: float
    coarse_min: float
    coarse_max: float
    noise_flagged: bool


def phi_star_laplacian_check(
    field: PhiField,
    subgrid_radius: float = 0.55,
    n_sub: int = 6,
    h: float = 1e-3,
    n_radial: int = 24,
    noise_tol: float = 0.10,
) -> PhiStarLaplacianReport:
    """Finite-difference invariant Laplacian of phi_* on an interior subgrid.

    Standard 5-point stencil divided by 4 (lap = dz dzbar), multiplied by
    (1-|w|^2)^2.  The scan is repeated on a once-refined smoothing grid; a
    change of the extremes above 10 percent flags stencil noise.
    """
    radii = np.linspace(0.0, subgrid_radius, n_sub + 1)[1:]
    pts = [0j]
    for r in radii:
        n = max(8, int(np.ceil(2 * np.pi * r / (subgrid_radius / n_sub))))
        pts.extend(r * np.exp(2j * np.pi * np.arange(n) / n))
    pts = np.asarray(pts)

    def extremes(vgrid):
        vals = []
        for w in pts:
            stencil = np.array([w + h, w - h, w + 1j * h, w - 1j * h, w])
            ps = phi_star(field, stencil, vgrid)
            lap = (ps[0] + ps[1] + ps[2] + ps[3] - 4 * ps[4]) / h**2 / 4
            vals.append((1 - abs(w) ** 2) ** 2 * lap)
        vals = np.asarray(vals)
        return float(vals.min()), float(vals.max())

    g1 = _log_weight_grid(field.rstar, n_radial)
    g2 = _log_weight_grid(field.rstar, n_radial * 2)
    mn1, mx1 = extremes(g1)
    mn2, mx2 = extremes(g2)
    scale = max(abs(mn2), abs(mx2), 1e-12)
    noisy = max(abs(mn1 - mn2), abs(mx1 - mx2)) / scale > noise_tol
    return PhiStarLaplacianReport(mn2, mx2, mn1, mx1, bool(noisy))


def ortega_condition(
    field: PhiField,
    rstar: float,
    centers: PointSet,
    n_radial: int = 48,
) -> float:
    """min over centers of int_{D(b, rstar)} lap phi dA (plain area measure).

    In shifted coordinates the Z-free part of the integrand becomes exactly
    the invariant measure density 1/(1-|v|^2)^2, so for empty Z the masses are
    center-independent: pi rstar^2/(1-rstar^2).
    """
    vgrid = build_grid(rstar, n_radial)
    v = vgrid.nodes
    base = vgrid.weights / (1 - np.abs(v) ** 2) ** 2
    worst = np.inf
    cpts = centers.points if len(centers) else np.array([0j])
    for b in cpts:
        b = complex(b)
        if len(field.Z):
            zmap = moebius(b, v)
            jac = ((1 - abs(b) ** 2) / np.abs(1 - np.conj(b) * v) ** 2) ** 2
            mass = float(np.sum(base) - field.p * np.sum(
                vgrid.weights * lap_kZ(field.Z, zmap) * jac
            ))
        else:
            mass = float(np.sum(base))
        worst = min(worst, mass)
    return worst
