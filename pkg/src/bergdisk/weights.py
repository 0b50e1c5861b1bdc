"""The weight k_Z and the regularized zero product Psi_Z.

For a finite point set Z in the disk,

    k_Z(z)     = (|z|^2 / 2) * sum_a (1-|a|^2)^2 / |1 - conj(a) z|^2
    E_a(z)     = (conj(a)/|a|) M_a(z) exp[1 - conj(a) M_a(z) - (1-|a|^2)/2]
                 (E_0(z) = z e^{1/2})
    Psi_Z      = prod_a E_a
    sigma_Z(z) = prod_a |M_a(z)| exp[(1 - |M_a(z)|^2)/2]

and the exact identity |Psi_Z| = sigma_Z e^{k_Z} ties them together.  All
products are evaluated in log space, one complex log per factor, so point sets
up to a thousand points neither overflow nor underflow.

Laplacian convention: lap = d/dz d/dzbar, one quarter of the standard
Laplacian.  Under it lap k_Z = (1/2) sum_a (1-|a|^2)^2/|1 - conj(a) z|^4 and
(1-|z|^2)^2 lap k_Z = (1/2) sum_a (1 - psi(z,a)^2)^2, which is the form the
density module checks against convention-free circle means.
"""

from __future__ import annotations

import numpy as np

from .geometry import PointSet, moebius, p_lambda_inverse, psi


def _expanded(Z: PointSet) -> np.ndarray:
    return Z.expanded() if isinstance(Z, PointSet) else np.asarray(Z, dtype=complex)


def k_Z(Z: PointSet, z) -> np.ndarray:
    """Evaluate k_Z; nonnegative, k_Z(0) = 0."""
    z = np.asarray(z, dtype=complex)
    pts = _expanded(Z)
    if len(pts) == 0:
        return np.zeros(z.shape)
    acc = np.zeros(z.shape)
    for a in pts:
        acc += (1 - abs(a) ** 2) ** 2 / np.abs(1 - np.conj(a) * z) ** 2
    return np.abs(z) ** 2 / 2 * acc


def E_a(a, z) -> np.ndarray:
    """Single normalized zero factor; vanishes exactly at a."""
    z = np.asarray(z, dtype=complex)
    a = complex(a)
    if a == 0:
        return z * np.exp(0.5)
    Ma = moebius(a, z)
    return (np.conj(a) / abs(a)) * Ma * np.exp(1 - np.conj(a) * Ma - (1 - abs(a) ** 2) / 2)


def log_E_a(a, z) -> np.ndarray:
    """Complex log of E_a; real part -inf exactly at z = a."""
    z = np.asarray(z, dtype=complex)
    a = complex(a)
    with np.errstate(divide="ignore"):
        if a == 0:
            return np.log(z.astype(complex)) + 0.5
        Ma = moebius(a, z)
        return (
            np.log((np.conj(a) / abs(a)) * Ma)
            + 1
            - np.conj(a) * Ma
            - (1 - abs(a) ** 2) / 2
        )


def log_Psi(Z: PointSet, z) -> np.ndarray:
    """Complex log of Psi_Z (sum of factor logs; branch is irrelevant after exp)."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape, dtype=complex)
    for a in _expanded(Z):
        acc = acc + log_E_a(a, z)
    return acc


def log_abs_Psi(Z: PointSet, z) -> np.ndarray:
    """log |Psi_Z(z)|; returns -inf exactly on Z."""
    return np.real(log_Psi(Z, z))


def Psi(Z: PointSet, z) -> np.ndarray:
    """Complex value of Psi_Z via the log-space product."""
    z = np.asarray(z, dtype=complex)
    out = np.exp(log_Psi(Z, z))
    # exp(-inf + i*nan) comes out as nan; the product vanishes there exactly.
    for a in _expanded(Z):
        out = np.where(z == a, 0.0, out)
    return out


def sigma_Z(Z: PointSet, z) -> np.ndarray:
    """The modulus-with-weight factor; values in [0, 1], zero exactly on Z."""
    z = np.asarray(z, dtype=complex)
    pts = _expanded(Z)
    if len(pts) == 0:
        return np.ones(z.shape)
    with np.errstate(divide="ignore"):
        acc = np.zeros(z.shape)
        for a in pts:
            m = np.abs(moebius(a, z))
            acc += np.where(m > 0, np.log(m), -np.inf) + (1 - m**2) / 2
    return np.exp(acc)


def check_Psi_identity(Z: PointSet, z) -> np.ndarray:
    """Relative residual of |Psi_Z| = sigma_Z e^{k_Z}; errors on Z itself."""
    z = np.asarray(z, dtype=complex)
    if len(Z) and np.any(np.isin(z, Z.expanded())):
        raise ValueError("identity residual is 0/0 at a point of Z")
    lhs = np.exp(log_abs_Psi(Z, z))
    rhs = sigma_Z(Z, z) * np.exp(k_Z(Z, z))
    return np.abs(lhs - rhs) / rhs


def expansion_constant(eta: float) -> float:
    """C with log(1/x) - (1-x) <= C (1-x)^2 for x >= eta^2.

    This is the tail sum_{k>=0} (1-eta^2)^k/(k+2) from the geometric expansion
    of log(1/x), evaluated at the threshold x = psi^2 = eta^2.  Closed form:
    (-log(eta^2) - (1-eta^2)) / (1-eta^2)^2.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    t = 1.0 - eta**2
    if t < 1e-8:
        return 0.5 + t / 3.0
    return (-np.log(eta**2) - t) / t**2


def sigma_lower_bound(Z: PointSet, eta: float, samples) -> float:
    """Lower bound for sigma_Z on points with psi(z, a) > eta for all a in Z.

    Returns exp(-C * S / 2) where S is the sampled supremum of
    sum_a (1 - psi(z,a)^2)^2 and C = expansion_constant(eta).  The bound is
    exact when a single point sits at distance exactly eta.
    """
    samples = np.asarray(samples, dtype=complex).ravel()
    pts = _expanded(Z)
    if len(pts) == 0:
        return 1.0
    S = 0.0
    for zc in samples:
        d = psi(zc, pts)
        if np.any(d <= eta):
            raise ValueError("sample point within eta of Z")
        S = max(S, float(np.sum((1 - d**2) ** 2)))
    return float(np.exp(-expansion_constant(eta) * S / 2))


def lap_kZ(Z: PointSet, z) -> np.ndarray:
    """lap k_Z under lap = dz dzbar: (1/2) sum_a (1-|a|^2)^2/|1-conj(a) z|^4."""
    z = np.asarray(z, dtype=complex)
    pts = _expanded(Z)
    acc = np.zeros(z.shape)
    for a in pts:
        acc += (1 - abs(a) ** 2) ** 2 / np.abs(1 - np.conj(a) * z) ** 4
    return acc / 2


def invariant_lap_kZ(Z: PointSet, z) -> np.ndarray:
    """(1-|z|^2)^2 lap k_Z = (1/2) sum_a (1 - psi(z,a)^2)^2 (Moebius invariant)."""
    z = np.asarray(z, dtype=complex)
    return (1 - np.abs(z) ** 2) ** 2 * lap_kZ(Z, z)


def _harmonic_poisson_term(b, z) -> np.ndarray:
    """(1 - |b|^2 |z|^2)/|1 - conj(b) z|^2 = Re[(1 + conj(b) z)/(1 - conj(b) z)]."""
    b = complex(b)
    z = np.asarray(z, dtype=complex)
    return (1 - abs(b) ** 2 * np.abs(z) ** 2) / np.abs(1 - np.conj(b) * z) ** 2


def perturbation_harmonic_sum(Z: PointSet, lam: float, z) -> np.ndarray:
    """The harmonic sum u tied to the radial perturbation Z = p_lambda(Z').

    Z is the (outer) input set; Z' = p_lambda^{-1}(Z) is the inner set.  Each
    summand is a difference of Poisson-type harmonic terms, so u is harmonic
    and u(0) = 0 exactly.
    """
    z = np.asarray(z, dtype=complex)
    inner = p_lambda_inverse(_expanded(Z), lam)
    outer = _expanded(Z)
    acc = np.zeros(z.shape)
    for a_in, a_out in zip(inner, outer):
        acc += (1 - abs(a_in) ** 2) * (
            _harmonic_poisson_term(a_out, z) - _harmonic_poisson_term(a_in, z)
        )
    return acc


def perturbation_defect(Z: PointSet, lam: float, z) -> np.ndarray:
    """k_Z - lam * k_{Z'} - u with Z' = p_lambda^{-1}(Z).

    The input Z plays the perturbed (outer) role: Z = p_lambda(Z').  The
    combination is the one bounded in terms of lambda and the separation
    constant alone; it vanishes at z = 0.
    """
    if len(Z) == 0:
        return np.zeros(np.asarray(z, dtype=complex).shape)
    if Z.contains_point(0):
        raise ValueError("0 must not belong to Z")
    aug = PointSet(np.concatenate([Z.points, [0.0 + 0.0j]]))
    from .geometry import separation_constant

    if separation_constant(aug) <= 0:
        raise ValueError("Z together with 0 must be separated")
    inner = PointSet(p_lambda_inverse(Z.expanded(), lam))
    return k_Z(Z, z) - lam * k_Z(inner, z) - perturbation_harmonic_sum(Z, lam, z)
