import numpy as np
import pytest

from bergdisk.geometry import PointSet, build_net
from bergdisk.quad import build_grid

SEED = 20240811


def disk_samples(rng, count, rmax=0.95):
    r = np.sqrt(rng.uniform(0, rmax**2, count))
    th = rng.uniform(0, 2 * np.pi, count)
    return r * np.exp(1j * th)


def mollifier_bump(r0=0.65, tilt=0.3):
    """Canonical smooth compactly supported test input."""

    def fn(w):
        w = np.asarray(w, dtype=complex)
        t = np.abs(w) / r0
        out = np.zeros(w.shape, dtype=complex)
        ins = t < 1
        out[ins] = np.exp(1 - 1 / (1 - t[ins] ** 2)) * (1 + tilt * w[ins].real)
        return out

    return fn


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def grid995():
    """Main quadrature grid at rmax = 0.995."""
    return build_grid(0.995, 96)


@pytest.fixture(scope="session")
def grid9():
    """Moderate grid for solver tests."""
    return build_grid(0.9, 64)


@pytest.fixture(scope="session")
def lattice_net():
    """A 41-point eta = 0.3 covering net (the shipped lattice)."""
    return build_net(0.3, 0.58)


@pytest.fixture(scope="session")
def small_net():
    """Sparser net for family and partition tests."""
    return build_net(0.45, 0.6)


@pytest.fixture(scope="session")
def random_sets(rng):
    """Deterministic random point sets of sizes 1, 10, 100."""
    return {n: PointSet(disk_samples(rng, n, 0.9)) for n in (1, 10, 100)}
