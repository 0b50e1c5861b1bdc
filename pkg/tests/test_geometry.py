import numpy as np
import pytest

from bergdisk.geometry import (
    CoveringNet,
    PointSet,
    PseudoDisk,
    build_net,
    euclidean_params,
    moebius,
    net_coverage_gap,
    p_lambda,
    p_lambda_inverse,
    psi,
    separation_constant,
)

from conftest import disk_samples


def test_psi_basic_values():
    assert psi(0j, 0.5 + 0j) == pytest.approx(0.5)
    assert psi(0.3 + 0.1j, 0.3 + 0.1j) == 0.0


def test_psi_moebius_invariance(rng):
    for _ in range(200):
        b, z, w = disk_samples(rng, 3, 0.95)
        assert psi(moebius(b, z), moebius(b, w)) == pytest.approx(psi(z, w), abs=1e-14)


def test_psi_triangle_inequality(rng):
    z, w, v = (disk_samples(rng, 500, 0.98) for _ in range(3))
    assert np.all(psi(z, w) <= psi(z, v) + psi(v, w) + 1e-12)


def test_moebius_involution_and_fixed_points(rng):
    a = 0.5 + 0.0j
    assert moebius(a, a) == pytest.approx(0.0)
    assert moebius(a, 0j) == pytest.approx(a)
    assert moebius(0.5 + 0j, moebius(0.5 + 0j, 0.3j)) == pytest.approx(0.3j, abs=1e-14)
    for _ in range(50):
        a, z = disk_samples(rng, 2, 0.95)
        assert moebius(a, moebius(a, z)) == pytest.approx(z, abs=1e-13)


def test_euclidean_params_formula():
    c, r = euclidean_params(PseudoDisk(0.5 + 0j, 0.5))
    assert c == pytest.approx(0.4)
    assert r == pytest.approx(0.4)
    c, r = euclidean_params(PseudoDisk(0j, 0.37))
    assert c == 0.0
    assert r == pytest.approx(0.37)


def test_pseudodisk_membership_agrees_with_psi(rng):
    for _ in range(10_000 // 100):
        z = disk_samples(rng, 1, 0.9)[0]
        rr = rng.uniform(0.05, 0.9)
        w = disk_samples(rng, 100, 0.99)
        disk = PseudoDisk(z, rr)
        c, er = euclidean_params(disk)
        euclid = np.abs(w - c) < er
        metric = psi(z, w) < rr
        assert np.array_equal(euclid, metric)


def test_separation_constant():
    assert separation_constant(PointSet([0j, 0.5 + 0j])) == pytest.approx(0.5)
    assert separation_constant(PointSet([0.3 + 0.1j, 0.3 + 0.1j])) == 0.0
    with pytest.raises(ValueError):
        separation_constant(PointSet([0.5 + 0j]))


def test_separation_against_bruteforce_oracle():
    net = build_net(0.2, 0.6)
    pts = net.centers.points
    brute = min(
        psi(pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts))
    )
    assert separation_constant(net.centers) == pytest.approx(brute, abs=1e-15)
    assert 0.1 <= brute <= 0.2


def test_p_lambda():
    p = p_lambda(0.6 + 0j, 0.5)
    assert abs(p) == pytest.approx(np.sqrt(0.68))
    assert np.angle(p) == pytest.approx(0.0)
    assert p_lambda(0j, 0.7) == 0.0
    a = 0.3 + 0.4j
    assert np.angle(p_lambda(a, 0.9)) == pytest.approx(np.angle(a))


def test_p_lambda_perturbation_shrinks_with_lambda():
    net = build_net(0.3, 0.7)
    pts = net.centers.points
    pts = pts[np.abs(pts) > 0]
    sups = []
    for lam in (0.9, 0.99, 0.999):
        sups.append(float(np.max(psi(pts, p_lambda(pts, lam)))))
    assert sups[0] > sups[1] > sups[2]
    assert sups[2] < 0.01


def test_p_lambda_inverse_roundtrip(rng):
    a = disk_samples(rng, 50, 0.9)
    lam = 0.8
    a = a[np.abs(a) ** 2 > 1 - lam]
    back = p_lambda(p_lambda_inverse(a, lam), lam)
    assert np.allclose(back, a, atol=1e-14)
    with pytest.raises(ValueError):
        p_lambda_inverse(np.array([0.1 + 0j]), 0.5)


def test_build_net_degenerate_region():
    net = build_net(0.5, 0.1)
    assert len(net.centers) == 1
    assert net.centers.points[0] == 0j


def test_build_net_separation_invariant():
    net = build_net(0.3, 0.7)
    assert separation_constant(net.centers) >= 0.15 - 1e-12


def test_build_net_coverage_scan(rng):
    net = build_net(0.3, 0.7)
    sample = disk_samples(rng, 100_000, 0.7)
    assert net_coverage_gap(net, sample) < 0.3


def test_build_net_rejects_tiny_eta():
    with pytest.raises(ValueError):
        build_net(0.003, 0.999)


def test_pointset_canonical_order(rng):
    pts = disk_samples(rng, 30, 0.9)
    perm = rng.permutation(30)
    assert np.array_equal(PointSet(pts).points, PointSet(pts[perm]).points)


def test_pointset_rejects_boundary_and_nonfinite():
    with pytest.raises(ValueError):
        PointSet([1.0 + 0j])
    with pytest.raises(ValueError):
        PointSet([1 - 1e-13 + 0j])
    with pytest.raises(ValueError):
        PointSet([complex(np.nan, 0)])


def test_pointset_multiplicity_handling():
    Z = PointSet([0.5 + 0j, 0.2j], [2, 1])
    assert len(Z.expanded()) == 3
    W = Z.without(PointSet([0.5 + 0j]))
    assert np.array_equal(np.sort(W.multiplicities), [1, 1])
    with pytest.raises(ValueError):
        Z.without(PointSet([0.9 + 0j]))
