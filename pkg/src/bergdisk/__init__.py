"""bergdisk: desk-scale numerics for weighted Bergman-space constructions.

Subpackages by theme: geometry (pseudo-hyperbolic disk), weights (k_Z, Psi_Z,
sigma_Z), quad (disk quadrature and transforms), kernels (Schur tests),
extremal (prescribed-zero extremal problems and the g_a family), dbar (plain
and patched solvers), interpolation (the bump + correction pipeline), density
(Seip-type criteria), io (file formats), cli (batch front end).
"""

from .geometry import (
    CoveringNet,
    PointSet,
    PseudoDisk,
    build_net,
    euclidean_params,
    moebius,
    p_lambda,
    psi,
    separation_constant,
)
from .quad import DiskGrid, LocalMeanSpec, build_grid, cauchy_transform, lp_norm
from .weights import (
    check_Psi_identity,
    k_Z,
    lap_kZ,
    log_abs_Psi,
    sigma_Z,
)

__version__ = "0.1.0"

__all__ = [
    "CoveringNet",
    "DiskGrid",
    "LocalMeanSpec",
    "PointSet",
    "PseudoDisk",
    "build_grid",
    "build_net",
    "cauchy_transform",
    "check_Psi_identity",
    "euclidean_params",
    "k_Z",
    "lap_kZ",
    "log_abs_Psi",
    "lp_norm",
    "moebius",
    "p_lambda",
    "psi",
    "separation_constant",
    "sigma_Z",
]
