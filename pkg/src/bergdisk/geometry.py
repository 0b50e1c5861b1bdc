"""Pseudo-hyperbolic geometry of the unit disk.

Points are complex numbers with |z| < 1.  The pseudo-hyperbolic metric is

    psi(z, w) = |z - w| / |1 - conj(w) z|

and M_a denotes the involutive Moebius transformation (a - z)/(1 - conj(a) z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Points this close to the boundary are rejected: every kernel in the package
# blows up at |z| = 1.
BOUNDARY_MARGIN = 1e-12

# Cap on the candidate grid used by build_net; protects against eta so small
# that the net construction would not terminate in reasonable time.
_NET_CANDIDATE_CAP = 500_000


def _require_in_disk(z) -> None:
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("point has non-finite coordinates")
    if np.any(np.abs(z) >= 1.0 - BOUNDARY_MARGIN):
        raise ValueError("point not strictly inside the unit disk")


def psi(z, w):
    """Pseudo-hyperbolic distance; symmetric and Moebius invariant."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)


def moebius(a, z):
    """M_a(z) = (a - z)/(1 - conj(a) z); an involution of the disk."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return (a - z) / (1.0 - np.conj(a) * z)


def p_lambda(a, lam: float):
    """Radial push toward the boundary: same argument, 1-|p|^2 = lam*(1-|a|^2).

    p_lambda(0) = 0 by convention.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    a = np.asarray(a, dtype=complex)
    mod2 = 1.0 - lam * (1.0 - np.abs(a) ** 2)
    phase = np.where(np.abs(a) > 0, a / np.where(np.abs(a) > 0, np.abs(a), 1.0), 0.0)
    return phase * np.sqrt(mod2)


def p_lambda_inverse(a, lam: float):
    """Inverse radial push: 1-|q|^2 = (1-|a|^2)/lam.  Errors if |a|^2 < 1-lam,
    in which case no preimage exists inside the disk."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    a = np.asarray(a, dtype=complex)
    mod2 = 1.0 - (1.0 - np.abs(a) ** 2) / lam
    if np.any(mod2 < 0):
        raise ValueError("p_lambda inverse leaves the disk for some point")
    phase = np.where(np.abs(a) > 0, a / np.where(np.abs(a) > 0, np.abs(a), 1.0), 0.0)
    return phase * np.sqrt(mod2)


@dataclass(frozen=True)
class PointSet:
    """A finite sequence of disk points with multiplicities, canonically ordered.

    The canonical order (modulus, then argument) makes every downstream sum
    deterministic regardless of input order.
    """

    points: np.ndarray
    multiplicities: np.ndarray

    def __init__(self, points=(), multiplicities=None):
        pts = np.asarray(list(points), dtype=complex).ravel()
        if multiplicities is None:
            mult = np.ones(len(pts), dtype=int)
        else:
            mult = np.asarray(list(multiplicities), dtype=int).ravel()
        if len(mult) != len(pts):
            raise ValueError("multiplicities length must match points")
        if np.any(mult < 1):
            raise ValueError("multiplicities must be positive")
        if len(pts):
            _require_in_disk(pts)
            order = np.lexsort((np.angle(pts) % (2 * np.pi), np.abs(pts)))
            pts = pts[order]
            mult = mult[order]
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "multiplicities", mult)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def expanded(self) -> np.ndarray:
        """Points repeated according to multiplicity."""
        return np.repeat(self.points, self.multiplicities)

    def transform(self, a) -> "PointSet":
        """Image under the Moebius map M_a (multiplicities kept)."""
        return PointSet(moebius(a, self.points), self.multiplicities)

    def without(self, drop: "PointSet") -> "PointSet":
        """Remove a sub-point-set, decrementing multiplicities."""
        pts = list(self.points)
        mult = list(self.multiplicities)
        for d, dm in zip(drop.points, drop.multiplicities):
            hit = [i for i, q in enumerate(pts) if q == d]
            if not hit or mult[hit[0]] < dm:
                raise ValueError("points to drop are not contained in the set")
            mult[hit[0]] -= dm
        keep = [i for i, m in enumerate(mult) if m > 0]
        return PointSet([pts[i] for i in keep], [mult[i] for i in keep])

    def contains_point(self, z) -> bool:
        return bool(np.any(self.points == complex(z)))


@dataclass(frozen=True)
class PseudoDisk:
    """Pseudo-hyperbolic disk D(center, radius), radius in (0, 1)."""

    center: complex
    radius: float

    def __post_init__(self):
        _require_in_disk(self.center)
        if not 0.0 < self.radius < 1.0:
            raise ValueError("radius must lie in (0, 1)")

    @property
    def euclidean_center(self) -> complex:
        z, r = self.center, self.radius
        return z * (1 - r**2) / (1 - r**2 * abs(z) ** 2)

    @property
    def euclidean_radius(self) -> float:
        z, r = self.center, self.radius
        return r * (1 - abs(z) ** 2) / (1 - r**2 * abs(z) ** 2)

    def contains(self, w) -> np.ndarray:
        return psi(self.center, w) < self.radius


def euclidean_params(d: PseudoDisk):
    """Euclidean (center, radius) of a pseudo-hyperbolic disk."""
    return d.euclidean_center, d.euclidean_radius


def separation_constant(Z: PointSet) -> float:
    """Minimum pairwise pseudo-hyperbolic distance; 0 for a repeated point."""
    if len(Z) < 2:
        raise ValueError("separation needs at least two points")
    if np.any(Z.multiplicities > 1):
        return 0.0
    pts = Z.points
    sep = np.inf
    for i in range(len(pts) - 1):
        sep = min(sep, float(np.min(psi(pts[i + 1 :], pts[i]))))
    return sep


@dataclass(frozen=True)
class CoveringNet:
    """Greedy maximal eta/2-separated centers covering {|z| <= rmax}.

    Maximality of the greedy pass gives, on the candidate grid, coverage at
    radius eta/2; the public guarantee is coverage within eta.
    """

    centers: PointSet
    eta: float
    rmax: float


def _hyperbolic_candidates(step: float, rmax: float) -> np.ndarray:
    """Polar candidate grid with roughly uniform pseudo-hyperbolic spacing.

    Radii advance by the Moebius addition r -> (r + step)/(1 + r*step) so the
    radial psi-increment is constant; the angular count per ring scales like
    r/((1-r^2)*step) so rings do not starve near the boundary.
    """
    radii = [0.0]
    r = 0.0
    while True:
        r = (r + step) / (1.0 + r * step)
        if r > rmax:
            break
        radii.append(r)
    pts = [0.0 + 0.0j]
    count = 1
    for r in radii[1:]:
        n = max(6, int(np.ceil(2 * np.pi * r / ((1 - r**2) * step))))
        count += n
        if count > _NET_CANDIDATE_CAP:
            raise ValueError("eta too small for the net candidate grid")
        theta = 2 * np.pi * np.arange(n) / n
        pts.append(r * np.exp(1j * theta))
    return np.concatenate([np.atleast_1d(p) for p in pts])


def build_net(eta: float, rmax: float, step_fraction: float = 0.25) -> CoveringNet:
    """Greedy maximal eta/2-separated net over {|z| <= rmax}.

    Every candidate grid point ends up within eta/2 of some center, so the
    covering invariant (distance < eta) holds with margin on the grid.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if not 0.0 < rmax < 1.0:
        raise ValueError("rmax must lie in (0, 1)")
    cand = _hyperbolic_candidates(eta * step_fraction, rmax)
    half = eta / 2.0
    centers: list[complex] = []
    arr = np.empty(0, dtype=complex)
    for c in cand:
        if len(centers) == 0 or np.all(psi(arr, c) >= half):
            centers.append(complex(c))
            arr = np.asarray(centers)
    return CoveringNet(PointSet(centers), eta, rmax)


def net_coverage_gap(net: CoveringNet, sample) -> float:
    """Largest distance from a sample point to its nearest net center."""
    sample = np.asarray(sample, dtype=complex).ravel()
    gap = 0.0
    for chunk in np.array_split(sample, max(1, len(sample) // 4096)):
        d = np.min(
            np.abs(chunk[:, None] - net.centers.points[None, :])
            / np.abs(1 - np.conj(net.centers.points[None, :]) * chunk[:, None]),
            axis=1,
        )
        gap = max(gap, float(d.max()))
    return gap
