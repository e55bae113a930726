"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 certification failure,
3 solver failure, 64 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import identities as ident
from .config import ConfigError, StudyConfig, load_config
from .fem import SolverError
from .geometry import InvertedLatticeError, build_mesh
from .report import solution_csv, to_csv, to_markdown, write_atomic
from .tensor import NotSPDError, SPDTensor2, certify_mesh, edge_energies, triangle_from_tensor
from .verification import CertificationError, run_study, solve_level

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CERT = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 64

OUTPUT_DIR_ENV = "SUPERFEM_OUTPUT_DIR"
EM_SEED = 20240601

log = logging.getLogger("superfem")


def _output_config(cfg: StudyConfig, output_dir: str | None) -> StudyConfig:
    directory = output_dir or os.environ.get(OUTPUT_DIR_ENV)
    return cfg.with_output_dir(directory) if directory else cfg


def cmd_gen_domain(args) -> int:
    try:
        A = SPDTensor2(args.a11, args.a12, args.a22)
        S = triangle_from_tensor(A, args.alpha)
    except (NotSPDError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    c1, c2 = S[:, 0], S[:, 1]
    corners = [(float(x), float(y)) for x, y in (np.zeros(2), c1, c1 + c2, c2)]
    c1, c2 = corners[1], corners[3]
    cert = certify_mesh(A, build_mesh((0.0, 0.0), c1, c2, 1))
    print(f"cell_edge_u = {c1[0]!r}, {c1[1]!r}")
    print(f"cell_edge_v = {c2[0]!r}, {c2[1]!r}")
    print("vertices = " + "; ".join(f"{p[0]!r}, {p[1]!r}" for p in corners))
    print(f"alpha = {cert.alpha!r}  spread = {cert.worst_spread:.3e}  certified = {cert.certified}")
    return EXIT_OK if cert.certified else EXIT_VERIFY


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    n = args.n or cfg.n_list[0]
    mesh = cfg.domain.mesh(n)
    cert = certify_mesh(cfg.tensor, mesh, cfg.certification_tolerance)
    worst = edge_energies(cfg.tensor, mesh.element_vertices[cert.worst_triangle], cfg.certification_tolerance)
    print(f"mesh n={n}: {mesh.num_triangles} triangles, tolerance {cfg.certification_tolerance:g}")
    print(f"alpha = {cert.alpha:.10g}")
    print(f"worst spread = {cert.worst_spread:.3e} at triangle {cert.worst_triangle}")
    print("energies of worst triangle = " + ", ".join(f"{e:.10g}" for e in worst.energies))
    if cert.certified:
        print("certified: uniformly A-equilateral")
        return EXIT_OK
    print("NOT certified: mesh is not uniformly A-equilateral")
    return EXIT_CERT if cfg.certification == "strict" else EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _output_config(load_config(args.config), args.output_dir)
    if args.force:
        cfg = replace(cfg, certification="off")
    table = run_study(
        cfg.domain, cfg.tensor, cfg.manufactured, cfg.n_list, cfg.quadrature,
        cfg.certification, cfg.certification_tolerance, cfg.solver_tolerance,
    )
    text = to_csv(table) if cfg.output_format == "csv" else to_markdown(table)
    path = write_atomic(cfg.output_path, text)
    sys.stdout.write(to_markdown(table))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _output_config(load_config(args.config), args.output_dir)
    if args.n < 1:
        raise ConfigError(f"-n must be a positive integer, got {args.n}")
    if cfg.certification != "off" and not args.force:
        cert = certify_mesh(cfg.tensor, cfg.domain.mesh(args.n), cfg.certification_tolerance)
        if not cert.certified:
            msg = f"mesh is not uniformly A-equilateral (relative spread {cert.worst_spread:.3e})"
            if cfg.certification == "strict":
                raise CertificationError(msg)
            log.warning(msg)
    m, uh, uI = solve_level(cfg.domain, cfg.tensor, cfg.manufactured, args.n, cfg.quadrature, cfg.solver_tolerance)
    text = solution_csv(m, uh, uI)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        out = args.output or str(Path(cfg.output_path).with_name(f"{Path(cfg.output_path).stem}_solve_n{args.n}.csv"))
        path = write_atomic(out, text)
        print(f"max |u_h - u_I| = {np.max(np.abs(uh - uI)):.4e}")
        print(f"wrote {path}")
    return EXIT_OK


def em_checks(seed: int = EM_SEED):
    """Yield (name, passed, detail) for the Euler-Maclaurin and triangle identity suite."""
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(50):
        a = rng.uniform(-1.0, 1.0)
        iv = ident.Interval(a, a + rng.uniform(0.05, 2.0))
        f = ident.SmoothFunction1D.polynomial(rng.uniform(-1.0, 1.0, 4))
        worst = max(worst, ident.em_decompose(f, iv).residual)
    yield "cubic exactness (50 intervals)", worst <= 1e-14, f"max residual {worst:.2e}"

    d = ident.em_decompose(ident.SmoothFunction1D.polynomial([0, 0, 0, 0, 1]), ident.Interval(-1.0, 1.0))
    expected = (2.0, -8.0 / 3.0, 16.0 / 15.0)
    got = (d.trapezoid, d.correction, d.remainder)
    ok = all(abs(g - e) <= 1e-14 for g, e in zip(got, expected)) and abs(d.total - 0.4) <= 1e-14
    yield (
        "x^4 on [-1, 1]",
        ok,
        f"trapezoid {d.trapezoid:.15g}, correction {d.correction:.15g}, remainder {d.remainder:.15g}, sum {d.total:.15g}",
    )

    iv = ident.Interval(-1.0, 1.0)
    g = (ident.em_weight(0.0, iv), ident.em_weight(-1.0, iv), ident.em_weight(1.0, iv), ident.em_weight(2**-0.5, iv))
    ok = abs(g[0] - 1 / 24) <= 1e-16 and g[1] == 0.0 and g[2] == 0.0 and abs(g[3] - 1 / 96) <= 1e-16
    yield "weight function values", ok, "G(0), G(+-1), G(1/sqrt 2) = " + ", ".join(f"{x:.15g}" for x in g)

    triangles = ident.random_triangles(rng, 100)
    worst = max(ident.verify_normal_identity(t) for t in triangles)
    yield "normal/gradient identity (100 triangles)", worst <= 1e-12, f"max residual {worst:.2e}"

    worst = cyc = 0.0
    for t in triangles:
        w = ident.Poly2.random(4, rng)
        worst = max([worst] + [ident.verify_edge_transfer(t, w, k) for k in (1, 2, 3)])
        cyc = max(cyc, ident.cyclic_transfer_residual(t, w))
    yield "edge transfer identities (100 triangles x 3)", worst <= 1e-11, f"max residual {worst:.2e}"
    yield "edge transfer cycle closes", cyc <= 1e-11, f"max residual {cyc:.2e}"


def cmd_em_verify(args) -> int:
    failed = 0
    for name, ok, detail in em_checks(args.seed):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed += not ok
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="superfem",
        description="P1 finite elements on A-equilateral parallelogram meshes.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-domain", help="parallelogram whose cells are A-equilateral")
    for name in ("a11", "a12", "a22", "alpha"):
        g.add_argument(f"--{name}", type=float, required=True)
    g.set_defaults(func=cmd_gen_domain)

    c = sub.add_parser("check", help="certify the configured mesh")
    c.add_argument("-c", "--config", required=True, help="config file or preset name")
    c.add_argument("-n", type=int, default=None, help="mesh level (default: first of n_list)")
    c.set_defaults(func=cmd_check)

    for name, func, helptext in (
        ("convergence", cmd_convergence, "run a convergence study"),
        ("solve", cmd_solve, "solve on one mesh and dump nodal values"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("-c", "--config", required=True, help="config file or preset name")
        s.add_argument("--output-dir", default=None, help=f"overrides ${OUTPUT_DIR_ENV}")
        s.add_argument("--force", action="store_true", help="skip the A-equilateral certification")
        s.set_defaults(func=func)
        if name == "solve":
            s.add_argument("-n", type=int, required=True)
            s.add_argument("-o", "--output", default=None, help="CSV path, or - for stdout")

    e = sub.add_parser("em-verify", help="Euler-Maclaurin and triangle identity checks")
    e.add_argument("--seed", type=int, default=EM_SEED)
    e.set_defaults(func=cmd_em_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotSPDError, InvertedLatticeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except SolverError as exc:
        print(f"solver failed: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
