import numpy as np
import pytest

from bergdisk.geometry import PointSet, build_net, moebius, psi
from bergdisk.weights import (
    E_a,
    check_Psi_identity,
    expansion_constant,
    invariant_lap_kZ,
    k_Z,
    lap_kZ,
    log_abs_Psi,
    perturbation_defect,
    sigma_Z,
    sigma_lower_bound,
)

from conftest import disk_samples


def test_k_Z_examples():
    assert k_Z(PointSet([]), 0.3 + 0.1j) == 0.0
    assert k_Z(PointSet([0j]), 0.8 + 0j) == pytest.approx(0.32)
    assert k_Z(PointSet([0.5 + 0j]), 0j) == 0.0


def test_k_Z_monotone_in_Z(rng):
    z = disk_samples(rng, 200, 0.95)
    Z = PointSet(disk_samples(rng, 20, 0.9))
    W = PointSet(Z.points[:7])
    assert np.all(k_Z(W, z) <= k_Z(Z, z) + 1e-15)


def test_E_a_zero_branch_and_root(rng):
    z = disk_samples(rng, 50, 0.95)
    assert np.allclose(E_a(0j, z), z * np.exp(0.5))
    for a in disk_samples(rng, 10, 0.9):
        assert E_a(a, a) == pytest.approx(0.0, abs=1e-15)


def test_E_a_single_factor_identity(rng):
    # |E_a(z)| = sigma_{a}(z) e^{k_{a}(z)}
    for _ in range(100):
        a, z = disk_samples(rng, 2, 0.9)
        lhs = abs(E_a(a, z))
        rhs = float(sigma_Z(PointSet([a]), z) * np.exp(k_Z(PointSet([a]), z)))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_log_abs_Psi_values(rng):
    Z = PointSet([0.5 + 0j, -0.3j])
    assert log_abs_Psi(Z, 0.5 + 0j) == -np.inf
    assert log_abs_Psi(PointSet([]), 0.2 + 0.1j) == 0.0
    # at the origin: sum of log|a| + (1-|a|^2)/2, negative
    expected = sum(
        np.log(abs(a)) + (1 - abs(a) ** 2) / 2 for a in Z.points
    )
    assert log_abs_Psi(Z, 0j) == pytest.approx(expected, rel=1e-13)
    assert expected < 0


def test_sigma_examples(rng):
    assert sigma_Z(PointSet([0j]), 0.8 + 0j) == pytest.approx(0.8 * np.exp(0.18))
    assert sigma_Z(PointSet([0.5 + 0j, 0.1j]), 0.1j) == 0.0
    Z = PointSet(disk_samples(rng, 30, 0.9))
    z = disk_samples(rng, 10_000, 0.99)
    assert np.all(sigma_Z(Z, z) <= 1.0 + 1e-12)


def test_Psi_identity(rng):
    assert check_Psi_identity(PointSet([]), 0.4 + 0.2j) == 0.0
    Z = PointSet([0.5j, -0.3 + 0j])
    z = disk_samples(rng, 100, 0.95)
    assert np.max(check_Psi_identity(Z, z)) <= 1e-10
    with pytest.raises(ValueError):
        check_Psi_identity(Z, np.array([0.5j]))


def test_sigma_lower_bound_empty_and_single_point():
    assert sigma_lower_bound(PointSet([]), 0.5, [0.1 + 0j]) == 1.0
    # single point at distance exactly eta: bound equals sigma (expansion is tight)
    Z = PointSet([0j])
    eta = 0.5
    zc = 0.5 * np.exp(0.3j)
    bound = sigma_lower_bound(Z, eta - 1e-12, [zc])
    sig = float(sigma_Z(Z, zc))
    assert bound <= sig + 1e-9
    assert bound == pytest.approx(sig, rel=1e-6)


def test_sigma_lower_bound_minorizes_on_circle(rng):
    Z = PointSet([0j])
    for rr in (0.55, 0.7, 0.9):
        zs = rr * np.exp(1j * rng.uniform(0, 2 * np.pi, 20))
        bound = sigma_lower_bound(Z, 0.5, zs)
        assert bound <= float(np.min(sigma_Z(Z, zs))) + 1e-12


def test_sigma_lower_bound_lattice_stable_in_sample_size(rng):
    net = build_net(0.4, 0.7)
    Z = net.centers
    eta = 0.15
    samples = []
    for n in (50, 500):
        cand = disk_samples(rng, 20 * n, 0.7)
        far = cand[np.min(np.abs(cand[:, None] - Z.points[None, :]) /
                          np.abs(1 - np.conj(Z.points[None, :]) * cand[:, None]), axis=1) > eta]
        samples.append(far[:n])
    b1 = sigma_lower_bound(Z, eta, samples[0])
    b2 = sigma_lower_bound(Z, eta, samples[1])
    assert b1 > 0 and b2 > 0
    # sampled suprema agree to 10 percent, so the bound is sample-size stable
    assert abs(np.log(b1) - np.log(b2)) < 0.1 * abs(np.log(b2)) + 0.05


def test_sigma_lower_bound_rejects_close_samples():
    with pytest.raises(ValueError):
        sigma_lower_bound(PointSet([0j]), 0.5, [0.3 + 0j])


def test_expansion_constant_closed_form():
    # series oracle: sum (1-eta^2)^k/(k+2)
    for eta in (0.3, 0.5, 0.8):
        t = 1 - eta**2
        series = sum(t**k / (k + 2) for k in range(2000))
        assert expansion_constant(eta) == pytest.approx(series, rel=1e-12)


def test_lap_kZ_single_point_constant(rng):
    z = disk_samples(rng, 100, 0.98)
    assert np.allclose(lap_kZ(PointSet([0j]), z), 0.5)


def test_lap_kZ_finite_difference_oracle():
    # 5-point stencil of the standard Laplacian divided by 4
    Z = PointSet([0.5 + 0j])
    z0 = 0.3 + 0.2j
    h = 1e-4
    stencil = (
        k_Z(Z, z0 + h)
        + k_Z(Z, z0 - h)
        + k_Z(Z, z0 + 1j * h)
        + k_Z(Z, z0 - 1j * h)
        - 4 * k_Z(Z, z0)
    ) / h**2
    assert float(stencil) / 4 == pytest.approx(float(lap_kZ(Z, z0)), rel=1e-5)


def test_lap_kZ_moebius_covariance(rng):
    Z = PointSet(disk_samples(rng, 15, 0.85))
    for _ in range(30):
        b, z = disk_samples(rng, 2, 0.9)
        lhs = float(invariant_lap_kZ(Z, z))
        rhs = float(invariant_lap_kZ(Z.transform(b), moebius(b, z)))
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_invariant_lap_bounded_on_separated_lattice():
    net = build_net(0.3, 0.8)
    z = disk_samples(np.random.default_rng(3), 2000, 0.97)
    vals = invariant_lap_kZ(net.centers, z)
    assert np.all(vals > 0)
    # bounded by a constant depending only on the separation constant
    assert float(np.max(vals)) < 60.0


def test_weighted_gradient_bounded_on_separated_lattice():
    net = build_net(0.3, 0.8)
    Z = net.centers
    z = disk_samples(np.random.default_rng(4), 1000, 0.97)
    h = 1e-5
    gx = (k_Z(Z, z + h) - k_Z(Z, z - h)) / (2 * h)
    gy = (k_Z(Z, z + 1j * h) - k_Z(Z, z - 1j * h)) / (2 * h)
    weighted = (1 - np.abs(z) ** 2) * np.hypot(gx, gy)
    assert float(np.max(weighted)) < 50.0


def _separated_lattice_for_perturbation(lam):
    net = build_net(0.4, 0.8)
    pts = [p for p in net.centers.points if abs(p) ** 2 > 1 - lam + 1e-3 and abs(p) > 0.35]
    return PointSet(pts)


def test_perturbation_defect_trivial_cases():
    assert np.all(perturbation_defect(PointSet([]), 0.9, np.array([0.3 + 0j])) == 0.0)
    Z = _separated_lattice_for_perturbation(0.9)
    assert float(perturbation_defect(Z, 0.9, np.asarray(0j))) == 0.0


def test_perturbation_defect_bounded_and_stable():
    from bergdisk.quad import build_grid

    Z = _separated_lattice_for_perturbation(0.9)
    sups = []
    for rmax in (0.9, 0.99):
        grid = build_grid(rmax, 48)
        sups.append(float(np.max(np.abs(perturbation_defect(Z, 0.9, grid.nodes)))))
    assert all(np.isfinite(sups))
    assert abs(sups[1] - sups[0]) <= 0.05 * sups[1]


def test_perturbation_defect_preconditions():
    with pytest.raises(ValueError):
        perturbation_defect(PointSet([0j, 0.5 + 0j]), 0.9, np.asarray(0.1 + 0j))
    with pytest.raises(ValueError):
        # inverse leaves the disk: |a|^2 < 1 - lambda
        perturbation_defect(PointSet([0.2 + 0j]), 0.5, np.asarray(0.1 + 0j))
