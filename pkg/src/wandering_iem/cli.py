"""Command line front end.

Every verb reads a :class:`RunConfig` (defaults, then ``--config``, then
flags), writes its artifacts into ``--out`` and exits 0 when all checks it ran
pass, 1 when one failed and 2 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ay
from . import fractal as fr
from . import minimal as mn
from .config import ConfigError, RunConfig
from .formats import dumps, svg_intervals, svg_points, write_json, write_points_csv, write_text

VERBS = ("render-fractal", "extreme-points", "psi-scan", "minimal-window", "build-affine",
         "verify-ifs", "verify-urp", "verify-boundary", "report")


def _dirs(n: int) -> np.ndarray:
    return np.arange(n) * (2 * np.pi / n)


# ---------------------------------------------------------------- stages
# each returns (ok, certificate dict) and writes its own files

def render_fractal(cfg: RunConfig, out: Path):
    sy = ay.system(cfg.theta)
    cl = fr.cloud(cfg.letter, cfg.depth, sy)
    labels = ["".join(map(str, row)) for row in cl.choices]
    stem = f"fractal_{cfg.letter}_d{cfg.depth}"
    write_points_csv(out / f"{stem}.csv", cl.points, labels)
    curve = ay.boundary_curve(cfg.letter)
    rot = np.exp(1j * cfg.theta)
    write_text(out / f"{stem}.svg", svg_points(cl.points, polylines=[curve.polyline * rot]))
    return True, {"letter": cfg.letter, "depth": cfg.depth, "theta": repr(cfg.theta), "n_points": len(cl),
                  "files": [f"{stem}.csv", f"{stem}.svg"]}


def extreme_points(cfg: RunConfig, out: Path):
    sy = ay.system(cfg.theta)
    thetas = _dirs(cfg.n_dirs)
    taus = np.exp(1j * thetas)
    rows, ok = [], True
    for th, tau in zip(thetas, taus):
        rep = fr.v_min(cfg.letter, cfg.extreme_depth, tau, sy)
        cont = fr.continuation_check(rep, sy, tol=cfg.tol)
        ok &= cont.ok
        rows.append({"theta": repr(float(th)), "extreme": rep.to_dict(), "continuation": cont.to_dict()})
    vals = np.array([fr.support_function(cfg.letter, n, taus, sy) for n in range(1, cfg.extreme_depth + 1)])
    steps = np.diff(vals, axis=0)
    monotone = bool((steps <= cfg.tol).all())
    ok &= monotone
    cert = {"letter": cfg.letter, "depth": cfg.extreme_depth, "n_dirs": cfg.n_dirs, "theta": repr(cfg.theta),
            "monotone": monotone, "max_increase": repr(float(steps.max())), "directions": rows, "ok": bool(ok)}
    write_json(out / f"extreme_{cfg.letter}_d{cfg.extreme_depth}.json", cert)
    return bool(ok), cert


def psi_scan(cfg: RunConfig, out: Path):
    sy = ay.system(cfg.theta)
    cands = fr.psi_scan(cfg.letter, _dirs(cfg.n_dirs), cfg.psi_depth, sy)
    cert = {"letter": cfg.letter, "depth": cfg.psi_depth, "theta": repr(cfg.theta),
            "candidates": [c.to_dict() for c in cands]}
    write_json(out / f"psi_{cfg.letter}_d{cfg.psi_depth}.json", cert)
    return True, cert


def minimal_window(cfg: RunConfig, out: Path):
    radius = max(cfg.N, 5000) + 1
    mw = ay.minimal_window(cfg.theta, radius)
    g = ay.gamma(cfg.theta)
    ns, vals = mw.re_sums()
    mini = mn.verify_minimality(mw.window, g)
    growth = mn.growth_check(mw.window, g, cfg.rho)
    rho_max = mn.rho_max(ay.ALPHA, ay.BETA)
    ok = bool(mini["ok"] and growth["ok"])
    cert = {"window": mw.sidecar(), "length": len(mw.window.word), "n_back": mw.window.n_back,
            "n_fwd": mw.window.n_fwd, "min_re_gamma": repr(float(vals.min())),
            "minimality": {k: (repr(v) if isinstance(v, float) else v) for k, v in mini.items()},
            "growth": {k: (repr(v) if isinstance(v, float) else v) for k, v in growth.items()},
            "rho_max": repr(float(rho_max)), "ok": ok}
    write_text(out / "minimal_window.txt", mw.to_text())
    write_json(out / "minimal_window.json", cert)
    return ok, cert


def build_affine(cfg: RunConfig, out: Path):
    res = ay.wandering_pipeline(cfg.theta, cfg.N, cfg.n_orbit)
    rep = res.report()
    slopes_ok = res.synthesis.ok(cfg.slope_tol) and all(
        abs(float(s / res.measure.slopes[a]) - 1) <= cfg.slope_tol
        for a, s in zip(res.synthesis.labels, res.synthesis.slopes))
    ok = bool(slopes_ok and res.orthogonality <= 1e-10 and res.semiconjugacy["max_residual"] <= cfg.tol
              and res.wandering.ok and res.wandering.total_length < 1)
    rep.update({"theta": repr(cfg.theta), "slopes_ok": bool(slopes_ok), "ok": ok})
    write_text(out / "affine_iem.json", dumps(res.synthesis.f.to_dict()))
    write_json(out / "wandering_report.json", rep)
    write_text(out / "gap_orbit.svg", svg_intervals(res.wandering.intervals))
    return ok, rep


def verify_ifs(cfg: RunConfig, out: Path):
    rep = ay.verify_ifs(cfg.ifs_depth, tol=cfg.tol)
    cert = rep.to_dict()
    write_json(out / "ifs_certificate.json", cert)
    return bool(rep.ok), cert


def verify_urp(cfg: RunConfig, out: Path):
    rows = ay.verify_urp_witnesses(cfg.urp_depth)
    ok = all(r.exact_match and all(r.certificates.values()) for r in rows)
    cert = {"depth": cfg.urp_depth, "rows": [r.to_dict() for r in rows], "ok": bool(ok)}
    write_json(out / "urp_certificate.json", cert)
    return bool(ok), cert


def urp_table(cert: dict) -> str:
    lines = [f"{'case':<6}{'w':>2}  {'exact':<6}{'certified':<10}value"]
    for r in cert["rows"]:
        cert_ok = all(r["certified_in"].values())
        lines.append(f"{r['case']:<6}{r['witness']:>2}  {str(r['exact_match']):<6}{str(cert_ok):<10}{r['value']}")
    return "\n".join(lines)


def verify_boundary(cfg: RunConfig, out: Path):
    rep = ay.verify_boundary_lemmas(cfg.boundary_depth, cfg.k_depth)
    curves = {}
    for a in ay.LETTERS:
        c = ay.boundary_curve(a)
        curves[a] = {"segments": c.n_segments, "closed": bool(c.closed), "joints_exact": bool(c.joints_ok)}
    k_ends = bool(ay.kappa_fixed_exact(0) == ay.Z0_EXACT and ay.K_END_EXACT == (-ay.b ** 2 - 2 * ay.b - 1) / 2)
    ok = bool(rep.ok and k_ends and all(v["closed"] and v["joints_exact"] for v in curves.values()))
    cert = {"lemmas": rep.to_dict(), "curves": curves, "kappa_ends_exact": k_ends, "ok": ok}
    write_json(out / "boundary_certificate.json", cert)
    return ok, cert


def report(cfg: RunConfig, out: Path):
    eig = ay.eigen_report()
    sections = {"eigen": (eig.ok(), eig.to_dict())}
    for name, fn in (("ifs", verify_ifs), ("urp", verify_urp), ("boundary", verify_boundary),
                     ("minimal_window", minimal_window), ("affine", build_affine)):
        sections[name] = fn(cfg, out)
    ok = all(v[0] for v in sections.values())
    cert = {"config": json_config(cfg), "sections": {k: {"ok": bool(v[0]), "certificate": v[1]}
                                                     for k, v in sections.items()}, "ok": bool(ok)}
    write_json(out / "report.json", cert)
    lines = [f"{k:<16}{'pass' if v[0] else 'FAIL'}" for k, v in sections.items()]
    lines.append(f"{'overall':<16}{'pass' if ok else 'FAIL'}")
    write_text(out / "report.txt", "\n".join(lines) + "\n")
    return bool(ok), cert


def json_config(cfg: RunConfig) -> dict:
    # the output directory is not an input of any certificate
    d = json.loads(cfg.to_json())
    d.pop("out")
    return d


STAGES = {"render-fractal": render_fractal, "extreme-points": extreme_points, "psi-scan": psi_scan,
          "minimal-window": minimal_window, "build-affine": build_affine, "verify-ifs": verify_ifs,
          "verify-urp": verify_urp, "verify-boundary": verify_boundary, "report": report}


# ---------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wandering-iem", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--letter")
    p.add_argument("--depth", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    return p


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    return cfg.replace(letter=args.letter, depth=args.depth, theta=args.theta, N=args.N, out=args.out, tol=args.tol)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.verb in ("extreme-points", "psi-scan") and args.depth is not None:
        # --depth addresses the stage being run
        key = "extreme_depth" if args.verb == "extreme-points" else "psi_depth"
        cfg = cfg.replace(**{key: args.depth})
    for verb, key in (("verify-ifs", "ifs_depth"), ("verify-urp", "urp_depth"), ("verify-boundary", "boundary_depth")):
        if args.verb == verb and args.depth is not None:
            cfg = cfg.replace(**{key: args.depth})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ok, cert = STAGES[args.verb](cfg, out)
    if args.verb == "verify-urp":
        print(urp_table(cert))
    if not ok:
        sys.stdout.write(dumps({"verb": args.verb, "ok": False, "certificate": cert}))
    print(f"{args.verb}: {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
