"""Batch front end: generate lattices, run experiments, emit CSV reports.

Every CSV starts with a comment line naming the conventions in force
(Laplacian = dz dzbar, dbar = standard Wirtinger) followed by a header row.
All floating point output uses repr (shortest round-trip), so a fixed seed
reproduces byte-identical files.

Exit codes: 0 success, 1 assertion failure, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys

import numpy as np

from . import density as dens
from . import io as bio
from .dbar import build_partition, solve_patched, solve_plain
from .extremal import (
    build_ga_family,
    constant_family,
    harm_eval_check,
    solve_extremal_general,
    solve_extremal_p2,
)
from .geometry import PointSet, build_net, moebius, psi, separation_constant
from .interpolation import TargetValues, interpolate, lp_seq_norm
from .kernels import KernelSpec, bump_poly_ensemble, operator_matrix, schur_certificate
from .quad import build_grid, lp_norm
from .weights import check_Psi_identity, invariant_lap_kZ, k_Z, lap_kZ, sigma_Z

CONVENTIONS = (
    "# conventions: lap = dz dzbar (quarter of the standard Laplacian); "
    "dbar = standard Wirtinger (factor 1/2); areas in dA"
)

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, complex):
        return f"{x.real!r}{'+' if x.imag >= 0 else '-'}{abs(x.imag)!r}j"
    return str(x)


def write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(CONVENTIONS + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _disk_samples(rng, count, rmax=0.95) -> np.ndarray:
    r = np.sqrt(rng.uniform(0, rmax**2, count))
    th = rng.uniform(0, 2 * np.pi, count)
    return r * np.exp(1j * th)


# ----------------------------------------------------------------- suites --

def suite_identities(seed: int, corrupt_scale: float = 1.0):
    """|Psi_Z| = sigma_Z e^{k_Z} and the Laplacian covariance, on random data.

    corrupt_scale other than 1 rescales k_Z inside the identity; the suite
    must then fail (negative control).
    """
    from .weights import log_abs_Psi

    rng = np.random.default_rng(seed)
    rows, failures = [], []
    for size in (1, 10, 100):
        Z = PointSet(_disk_samples(rng, size, 0.9))
        z = _disk_samples(rng, 1000, 0.95)
        z = z[~np.isin(z, Z.points)]
        if corrupt_scale == 1.0:
            resid = float(np.max(check_Psi_identity(Z, z)))
        else:
            lhs = np.exp(log_abs_Psi(Z, z))
            rhs = sigma_Z(Z, z) * np.exp(corrupt_scale * k_Z(Z, z))
            resid = float(np.max(np.abs(lhs - rhs) / rhs))
        rows.append(("psi_identity_max_residual", size, resid, 1e-10))
        if resid > 1e-10:
            failures.append(f"identity residual {resid:.3e} at |Z|={size}")
        sig = sigma_Z(Z, z)
        rows.append(("sigma_max", size, float(np.max(sig)), 1.0))
        if np.max(sig) > 1.0 + 1e-12:
            failures.append("sigma exceeded 1")
        b, zz = _disk_samples(rng, 1, 0.8)[0], _disk_samples(rng, 50, 0.9)
        cov = float(
            np.max(
                np.abs(
                    invariant_lap_kZ(Z, zz)
                    - invariant_lap_kZ(Z.transform(b), moebius(b, zz))
                )
            )
        )
        rows.append(("lap_covariance_max_abs_err", size, cov, 1e-10))
        if cov > 1e-10:
            failures.append(f"lap covariance {cov:.3e}")
    return rows, failures


def suite_kernels(seed: int):
    """Schur window at a = b = 0, p = 2 plus the ensemble norm bound."""
    rows, failures = [], []
    spec = KernelSpec(a=0.0, b=0.0, variant="K", p=2.0)
    expected = {0.1: True, 0.25: True, 0.4: True, -0.1: False, 0.6: False}
    bound = np.inf
    for alpha, want in expected.items():
        cert = schur_certificate(spec, alpha)
        verdict = "success" if cert.success else "divergent"
        rows.append((spec.a, spec.b, spec.p, 0.0, alpha, cert.C1, cert.C2, 0.0, verdict))
        if cert.success != want:
            failures.append(f"alpha={alpha}: expected {'success' if want else 'failure'}")
        if alpha == 0.25 and cert.success:
            bound = cert.operator_bound
    grid = build_grid(0.9, 24)
    mat = operator_matrix(spec, grid)
    worst = 0.0
    for fn in bump_poly_ensemble(32, 6, seed):
        fv = fn(grid.nodes)
        nf = lp_norm(fv, None, 2.0, grid)
        if nf == 0:
            continue
        worst = max(worst, lp_norm(mat @ fv, None, 2.0, grid) / nf)
    rows.append((spec.a, spec.b, spec.p, 0.0, 0.25, bound, bound, worst, "ensemble"))
    if worst > bound:
        failures.append(f"empirical norm {worst:.3f} above Schur bound {bound:.3f}")
    return rows, failures


def suite_extremal(seed: int):
    rows, failures = [], []
    grid = build_grid(0.995, 96)
    W = PointSet([0.5])
    m2, i2 = solve_extremal_p2(W, 10, grid)
    mg, ig = solve_extremal_general(W, 2.0, 8, grid)
    gap = abs(i2.value_at_origin - ig.value_at_origin)
    res = float(np.max(harm_eval_check(mg, 2.0, 4, grid)))
    nrm = mg.norm(2.0, grid)
    rows.append(("p2_value", i2.value_at_origin, 0.0))
    rows.append(("general_value", ig.value_at_origin, 0.0))
    rows.append(("cross_method_gap", gap, 1e-3))
    rows.append(("harm_eval_max_residual", res, 1e-5))
    rows.append(("norm_defect", abs(nrm - 1), 1e-8))
    if gap > 1e-3:
        failures.append(f"solver disagreement {gap:.2e}")
    if res > 1e-5:
        failures.append(f"harm.eval residual {res:.2e}")
    if abs(nrm - 1) > 1e-8:
        failures.append(f"norm defect {abs(nrm-1):.2e}")
    return rows, failures


def _test_bump(r0=0.65):
    def fn(w):
        w = np.asarray(w, dtype=complex)
        t = np.abs(w) / r0
        out = np.zeros(w.shape, dtype=complex)
        ins = t < 1
        out[ins] = np.exp(1 - 1 / (1 - t[ins] ** 2)) * (1 + 0.4 * w[ins].real)
        return out

    return fn


def suite_dbar(seed: int):
    rows, failures = [], []
    grid = build_grid(0.9, 64)
    f = _test_bump()
    _, _, rep = solve_plain(f, 2, PointSet([]), grid)
    rows.append((rep.p, rep.n_points, rep.m, grid.n_radial, rep.residual_ratio, rep.bound_ratio))
    if rep.residual_ratio > 5e-3:
        failures.append(f"plain residual {rep.residual_ratio:.2e}")
    net = build_net(0.4, 0.8)
    part = build_partition(net, grid)
    fam = constant_family(net, PointSet([]), 2.0)
    _, _, repp = solve_patched(f, PointSet([]), 2.0, fam, part, 2, grid)
    rows.append((repp.p, repp.n_points, repp.m, grid.n_radial, repp.residual_ratio, repp.bound_ratio))
    if repp.residual_ratio > 5e-3:
        failures.append(f"patched residual {repp.residual_ratio:.2e}")
    return rows, failures


def suite_interpolate(seed: int):
    rows, failures = [], []
    rng = np.random.default_rng(seed)
    net = build_net(0.45, 0.62)
    Z = net.centers
    grid = build_grid(0.9, 64, singular_points=tuple(Z.points), depth=3)
    vals = rng.standard_normal(len(Z)) + 1j * rng.standard_normal(len(Z))
    c = TargetValues(Z.points, vals / lp_seq_norm(TargetValues(Z.points, vals), 2.0))
    _, rep = interpolate(Z, c, 2.0, 0.05, grid)
    rows.append((rep.p, rep.n_points, rep.node_err_max, rep.norm_ratio, rep.analytic_residual))
    if rep.node_err_max > 1e-6:
        failures.append(f"node error {rep.node_err_max:.2e}")
    if not np.isfinite(rep.norm_ratio):
        failures.append("norm ratio not finite")
    return rows, failures


def suite_density(seed: int):
    rows, failures = [], []
    rng = np.random.default_rng(seed)
    net = build_net(0.3, 0.7)
    Z = net.centers
    r = 0.8
    closed = dens.splus_circle_mean(Z, r)
    th = 2 * np.pi * np.arange(4096) / 4096
    quadv = float(np.mean(k_Z(Z, r * np.exp(1j * th))))
    gap = abs(closed - quadv)
    rows.append((r, -1, closed, quadv, gap, 0.0))
    if gap > 1e-8:
        failures.append(f"circle mean mismatch {gap:.2e}")
    centers = PointSet([0j, 0.3 + 0.2j])
    for p in (1.0, 2.0):
        m1 = dens.seip_criterion_means(Z, p, 0.7, centers)
        m2 = dens.seip_criterion_laplace(Z, p, 0.7, centers)
        rows.append((0.7, 0, p, m1, m2, m1 * m2))
        if np.sign(m1) != np.sign(m2):
            failures.append(f"margin sign mismatch at p={p}")
    return rows, failures


SUITES = {
    "identities": (suite_identities, ("quantity", "set_size", "value", "bound")),
    "kernels": (suite_kernels, ("a", "b", "p", "q", "alpha", "C1", "C2", "empirical_norm", "verdict")),
    "extremal": (suite_extremal, ("quantity", "value", "bound")),
    "dbar": (suite_dbar, ("p", "n_points", "m", "grid_depth", "residual_ratio", "bound_ratio")),
    "interpolate": (suite_interpolate, ("p", "n_points", "node_err_max", "norm_ratio", "residual")),
    "density": (suite_density, ("r", "center_id", "numerator", "denominator", "value", "margin")),
}


# ------------------------------------------------------------- subcommands --

def cmd_gen_lattice(args) -> int:
    net = build_net(args.eta, args.rmax)
    bio.save_pointset(net.centers, args.out)
    sep = separation_constant(net.centers) if len(net.centers) > 1 else 1.0
    print(f"wrote {args.out}: n={len(net.centers)} separation={sep!r}")
    return EXIT_OK


def cmd_eval_weight(args) -> int:
    Z = bio.load_pointset(args.points)
    rng = np.random.default_rng(args.seed)
    z = _disk_samples(rng, args.samples)
    rows = [
        (zi, float(k_Z(Z, zi)), float(sigma_Z(Z, zi)), float(lap_kZ(Z, zi)))
        for zi in z
    ]
    write_csv(args.out, ("z", "k_Z", "sigma_Z", "lap_k_Z"), rows)
    print(f"wrote {args.out}: {len(rows)} samples")
    return EXIT_OK


def cmd_extremal(args) -> int:
    W = bio.load_pointset(args.points)
    grid = build_grid(0.995, args.n_radial)
    model, info = solve_extremal_general(W, args.p, args.degree, grid)
    res = harm_eval_check(model, args.p, 4, grid)
    rows = [
        ("value_at_origin", info.value_at_origin),
        ("norm", model.norm(args.p, grid)),
        ("converged", int(info.converged)),
        ("harm_eval_max_residual", float(np.max(res))),
    ]
    write_csv(args.out, ("quantity", "value"), rows)
    if args.model_out:
        bio.save_analytic_model(model, args.model_out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_solve_dbar(args) -> int:
    Z = bio.load_pointset(args.points) if args.points else PointSet([])
    f = _test_bump(args.support)
    rows, series = [], []
    for n_radial in (args.n_radial, args.n_radial * 3 // 2):
        grid = build_grid(args.rmax, n_radial)
        if args.patched and len(Z):
            net = build_net(args.eta, min(0.9, args.rmax))
            part = build_partition(net, grid)
            fam = build_ga_family(Z, args.p, net, args.r_drop, args.degree, grid)
            _, _, rep = solve_patched(f, Z, args.p, fam, part, args.m, grid)
        else:
            _, _, rep = solve_plain(f, args.m, Z, grid, p=args.p)
        rows.append((rep.p, rep.n_points, rep.m, n_radial, rep.residual_ratio, rep.bound_ratio))
        series.append((n_radial, rep.residual_ratio))
    write_csv(args.out, ("p", "n_points", "m", "grid_depth", "residual_ratio", "bound_ratio"), rows)
    write_csv(args.out + ".series.csv", ("grid_depth", "residual_ratio"), series)
    print(f"wrote {args.out} (+ residual-vs-depth series)")
    return EXIT_OK


def cmd_interpolate(args) -> int:
    Z = bio.load_pointset(args.points)
    if args.targets:
        c = bio.load_targets(args.targets)
    else:
        rng = np.random.default_rng(args.seed)
        raw = rng.standard_normal(len(Z)) + 1j * rng.standard_normal(len(Z))
        c = TargetValues(Z.points, raw)
        c = TargetValues(Z.points, c.values / lp_seq_norm(c, args.p))
    grid = build_grid(args.rmax, args.n_radial, singular_points=tuple(Z.points), depth=3)
    _, rep = interpolate(Z, c, args.p, args.eta, grid)
    rows = [(rep.p, rep.n_points, rep.node_err_max, rep.norm_ratio, rep.analytic_residual)]
    write_csv(args.out, ("p", "n_points", "node_err_max", "norm_ratio", "residual"), rows)
    print(f"wrote {args.out}: node_err_max={rep.node_err_max!r}")
    return EXIT_OK


def cmd_density(args) -> int:
    Z = bio.load_pointset(args.points)
    centers = bio.load_pointset(args.centers) if args.centers else PointSet([0j])
    rows, series = [], []
    for r in args.r:
        den = dens.log_denominator(r)
        for ci, b in enumerate(centers.points):
            num = dens.splus_circle_mean(Z.transform(b), r)
            rows.append((r, ci, num, den, num / den, 1 - args.p * num / den))
        margin = dens.seip_criterion_means(Z, args.p, r, centers)
        series.append((r, margin))
    write_csv(args.out, ("r", "center_id", "numerator", "denominator", "value", "margin"), rows)
    write_csv(args.out + ".series.csv", ("r", "margin"), series)
    print(f"wrote {args.out} (+ margin-vs-r series)")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite == "identities":
        rows, failures = suite_identities(args.seed, args.corrupt_scale)
        header = SUITES["identities"][1]
    else:
        fn, header = SUITES[args.suite]
        rows, failures = fn(args.seed)
    write_csv(args.out, header, rows)
    if failures:
        print(f"FAIL {args.suite}: {failures[0]}", file=sys.stderr)
        for extra in failures[1:]:
            print(f"  also: {extra}", file=sys.stderr)
        return EXIT_ASSERT
    print(f"PASS {args.suite}: {len(rows)} measurements -> {args.out}")
    return EXIT_OK


# ------------------------------------------------------------------ driver --

def _apply_config(args, parser_defaults):
    if not getattr(args, "config", None):
        return args
    cfg = configparser.ConfigParser()
    if not cfg.read(args.config):
        raise ValueError(f"cannot read config file {args.config}")
    section = args.command.replace("-", "_")
    if cfg.has_section(section):
        for key, val in cfg.items(section):
            if getattr(args, key, None) is None:
                default = parser_defaults.get(key)
                typ = type(default) if default is not None else str
                setattr(args, key, typ(val) if typ is not list else val)
    return args


def _float_list(text):
    return [float(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bergdisk", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-lattice", help="write a covering-net point set")
    g.add_argument("--eta", type=float, required=True)
    g.add_argument("--rmax", type=float, required=True)
    g.add_argument("--out", required=True)

    w = sub.add_parser("eval-weight", help="sample k_Z, sigma_Z, lap k_Z")
    w.add_argument("--points", required=True)
    w.add_argument("--samples", type=int, default=200)
    w.add_argument("--seed", type=int, default=1)
    w.add_argument("--out", required=True)

    e = sub.add_parser("extremal", help="solve the extremal problem on a point set")
    e.add_argument("--points", required=True)
    e.add_argument("--p", type=float, default=2.0)
    e.add_argument("--degree", type=int, default=8)
    e.add_argument("--n-radial", type=int, default=96)
    e.add_argument("--out", required=True)
    e.add_argument("--model-out", default=None)

    s = sub.add_parser("solve-dbar", help="solve (1-|z|^2) dbar u = f on a test bump")
    s.add_argument("--points", default=None)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--eta", type=float, default=0.4)
    s.add_argument("--r-drop", type=float, default=0.3)
    s.add_argument("--degree", type=int, default=6)
    s.add_argument("--n-radial", type=int, default=64)
    s.add_argument("--rmax", type=float, default=0.9)
    s.add_argument("--support", type=float, default=0.65)
    s.add_argument("--patched", action="store_true")
    s.add_argument("--out", required=True)

    i = sub.add_parser("interpolate", help="run the interpolation pipeline")
    i.add_argument("--points", required=True)
    i.add_argument("--targets", default=None)
    i.add_argument("--seed", type=int, default=1)
    i.add_argument("--p", type=float, default=2.0)
    i.add_argument("--eta", type=float, default=0.05)
    i.add_argument("--n-radial", type=int, default=64)
    i.add_argument("--rmax", type=float, default=0.9)
    i.add_argument("--out", required=True)

    d = sub.add_parser("density", help="density numerators and criterion margins")
    d.add_argument("--points", required=True)
    d.add_argument("--centers", default=None)
    d.add_argument("--p", type=float, default=2.0)
    d.add_argument("--r", type=_float_list, default=[0.9, 0.99, 0.999])
    d.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run a named assertion suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--out", required=True)
    v.add_argument(
        "--corrupt-scale",
        type=float,
        default=1.0,
        help="negative-control hook: rescale k_Z inside the identities suite",
    )

    for p in (g, w, e, s, i, d, v):
        p.add_argument("--config", default=None, help="INI file with per-command sections")
    return ap


HANDLERS = {
    "gen-lattice": cmd_gen_lattice,
    "eval-weight": cmd_eval_weight,
    "extremal": cmd_extremal,
    "solve-dbar": cmd_solve_dbar,
    "interpolate": cmd_interpolate,
    "density": cmd_density,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args = _apply_config(args, {})
        return HANDLERS[args.command](args)
    except (ValueError, np.linalg.LinAlgError, FloatingPointError, OSError) as exc:
        print(f"numeric/runtime failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
