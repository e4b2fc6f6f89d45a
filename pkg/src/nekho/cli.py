"""Command line harness: ``nekho dio|constants|cover|certify|simulate|sweep``.

Exit codes: 0 success, 2 configuration error, 3 certification violation,
4 hypothesis not met (only with ``--strict``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import config as cfgmod
from .constants import thm1, thm2, thm3, thm33, thm4
from .diophantine import best_gamma, psi as psi_fn
from .dynamics import drift_sweep, fourier_norm, integrate
from .errors import ConfigError, HypothesisNotMetError, NekhoError, ResonantWitnessError
from .geometry import (
    Covering,
    certify_block,
    covering_params,
    task_rng,
)
from .lattice import SubmoduleBasis, canonicalize

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION, EXIT_HYPOTHESIS = 0, 2, 3, 4

log = logging.getLogger("nekho")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, SubmoduleBasis):
        return o.to_json()
    return str(o)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default)


def header_line(cfg: dict) -> str:
    return "# config: " + json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def threads() -> int:
    try:
        return max(1, int(os.environ.get("NEKHO_THREADS", "1")))
    except ValueError:
        return 1


class Output:
    """Writes named artifacts to a directory, or to stdout when none is given."""

    def __init__(self, out_dir: Optional[str], stdout=None):
        self.dir = Path(out_dir) if out_dir else None
        self.stdout = stdout or sys.stdout
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.dir:
            (self.dir / name).write_text(text)
        else:
            self.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(cfg: dict, header: list[str], rows, trailer: Optional[list[str]] = None) -> str:
    buf = io.StringIO()
    buf.write(header_line(cfg) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    for line in trailer or []:
        buf.write(line + "\n")
    return buf.getvalue()


def _tau(cfg) -> float:
    p = cfg["problem"]
    return float(p.get("tau", p["m"] - 1))


def _gamma(cfg, horizon: int) -> float:
    p = cfg["problem"]
    if "gamma" in p:
        return float(p["gamma"])
    return best_gamma(cfgmod.alpha_of(cfg), _tau(cfg), max(1, int(horizon))).gamma


def _seed(cfg, args) -> int:
    if args.seed is not None:
        return int(args.seed)
    return int(cfg.get("geometry", {}).get("seed", 0))


# ---------------------------------------------------------------------------


def cmd_dio(cfg, args, out: Output) -> int:
    p = cfg["problem"]
    alpha = cfgmod.alpha_of(cfg)
    K_max = int(p.get("K_max", 50))
    prof = best_gamma(alpha, _tau(cfg), K_max)
    res = {"alpha": list(alpha.alpha), "alpha_kind": alpha.tag or None, **prof.to_dict(),
           "psi_1": psi_fn(alpha.alpha, 1), "config": cfg}
    out.write("dio.json", dumps(res))
    return EXIT_OK


def _ell_M(cfg, spec):
    p = cfg["problem"]
    ell = float(p.get("ell", min(1.0, spec.ell)))
    M = float(p.get("M", max(spec.M, ell)))
    return ell, M


def cmd_constants(cfg, args, out: Output) -> int:
    p = cfg["problem"]
    run = cfg.get("run", {})
    theorem = str(args.theorem or run.get("theorem", "1"))
    spec = cfgmod.spec_of(cfg)
    ell, M = _ell_M(cfg, spec)
    n, tau = p["n"], _tau(cfg)
    r0, s0 = spec.r0, spec.s0
    eps = p.get("eps")
    Omega = spec.omega_bound()
    status = EXIT_OK
    if theorem in ("1", "2", "3", "33"):
        gamma = _gamma(cfg, p.get("K_max", 50))
    if theorem == "1":
        c = thm1(n, tau, gamma, ell, M, Omega, r0, s0, eps)
        res = c.to_dict()
        if eps is not None and not c.hypothesis_met():
            status = EXIT_HYPOTHESIS
    elif theorem == "2":
        rows = cfg.get("geometry", {}).get("L")
        L = canonicalize(rows, n, p["m"]) if rows else SubmoduleBasis.zero(n, p["m"])
        c = thm2(L, n, tau, gamma, ell, M, r0, eps, s0=s0, Omega=Omega,
                 printed=bool(run.get("printed_form", False)))
        res = c.to_dict()
        if eps is not None and not c.hypothesis_met():
            status = EXIT_HYPOTHESIS
    elif theorem == "3":
        c = thm3(n, tau, gamma, float(p.get("mbar", ell)), M, r0, s0)
        res = c.to_dict()
        if eps is not None:
            res.update(eps=eps, R=c.R(eps), T=c.T(eps), hypothesis_met=c.hypothesis_met(eps))
            if not c.hypothesis_met(eps):
                status = EXIT_HYPOTHESIS
    elif theorem == "33":
        gp = float(p.get("gamma_prime", gamma))
        tp = float(p.get("tau_prime", max(tau, p["n"] + p["m"] - 1) + 1))
        c = thm33(n, tau, gp, tp, M, r0, s0, gamma=gamma, m=p["m"])
        res = c.to_dict()
        if eps is not None:
            res.update(eps=eps, R=c.R(eps), T=c.T(eps), hypothesis_met=c.hypothesis_met(eps))
            if not c.hypothesis_met(eps):
                status = EXIT_HYPOTHESIS
    else:
        if eps is None:
            raise ConfigError("problem/eps: required for theorem 4")
        alpha = cfgmod.alpha_of(cfg)
        try:
            res = thm4(n, alpha, ell, M, r0, s0, eps, Omega=Omega).to_dict()
            if not (res["K_ok"] and res["R_ok"]):
                status = EXIT_HYPOTHESIS
        except HypothesisNotMetError as exc:
            res = {"theorem": "4", "eps": eps, "hypothesis_met": False, "error": str(exc)}
            status = EXIT_HYPOTHESIS
    res["config"] = cfg
    out.write(f"constants_thm{theorem}.json", dumps(res))
    return status if args.strict else EXIT_OK


def _covering(cfg):
    p, g = cfg["problem"], cfg.get("geometry", {})
    n, m = p["n"], p["m"]
    K = float(g.get("K", 2))
    tau = _tau(cfg)
    gamma = _gamma(cfg, (n + 1) * math.floor(K) ** (n + 1))
    ell = float(p.get("ell", 1.0))
    M = float(p.get("M", 1.0))
    params = covering_params(n, m, K, gamma, tau, ell, M)
    if "lambda_scale" in g:
        params = params.scaled(float(g["lambda_scale"]))
    return Covering.build(cfgmod.alpha_of(cfg), params), gamma


def _box(cfg):
    n = cfg["problem"]["n"]
    b = cfg.get("geometry", {}).get("box")
    if b:
        return np.asarray(b["lo"], float), np.asarray(b["hi"], float)
    return -3.0 * np.ones(n), 3.0 * np.ones(n)


def _svg(points, ds, box) -> str:
    lo, hi = box
    size = 600
    colors = ["#d0d0d0", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"]

    def px(p):
        return (size * (p[0] - lo[0]) / (hi[0] - lo[0]),
                size * (1 - (p[1] - lo[1]) / (hi[1] - lo[1])))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">', f'<rect width="{size}" height="{size}" fill="white"/>']
    for p, d in zip(points, ds):
        x, y = px(p)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="{colors[min(d, len(colors) - 1)]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_cover(cfg, args, out: Output) -> int:
    n = cfg["problem"]["n"]
    g = cfg.get("geometry", {})
    cov, _ = _covering(cfg)
    lo, hi = _box(cfg)
    N = int(g.get("samples", 1000))
    pts = task_rng(_seed(cfg, args), 0).uniform(lo, hi, size=(N, n))
    assigns = cov.classify_many(pts)
    want = g.get("d")
    rows = []
    for p, a in zip(pts, assigns):
        if want is not None and a.d != want:
            continue
        rows.append([*p.tolist(), a.d, json.dumps(a.module.to_json(), separators=(",", ":")),
                     a.distance_to_resonance, a.margin])
    header = [f"omega_{i + 1}" for i in range(n)] + ["d", "module", "distance", "margin"]
    out.write("cover.csv", _csv(cfg, header, rows))
    if n == 2 and g.get("svg", True) and out.dir:
        out.write("cover.svg", _svg([r[:2] for r in rows], [r[2] for r in rows], (lo, hi)))
    return EXIT_OK


def cmd_certify(cfg, args, out: Output) -> int:
    p, g = cfg["problem"], cfg.get("geometry", {})
    n, m = p["n"], p["m"]
    cov, gamma = _covering(cfg)
    want = g.get("d")
    ranks = range(0, n + 1) if want is None else [want]
    mods = [lat for d in ranks for lat in cov.modules(d)]
    count = int(g.get("certify_samples", 1000))
    seed = _seed(cfg, args)
    half = float(np.max(np.abs(np.concatenate(_box(cfg)))))

    def job(i):
        return certify_block(mods[i], cov, count, seed, task=i, half_width=half)

    with ThreadPoolExecutor(max_workers=threads()) as ex:
        reports = list(ex.map(job, range(len(mods))))
    total = sum(len(r.violations) for r in reports)
    res = {"gamma": gamma, "tau": _tau(cfg), "params": cov.params.to_dict(),
           "blocks": len(reports), "violations_total": total,
           "certificates": [r.to_dict() for r in reports], "config": cfg}
    out.write("certify.json", dumps(res))
    return EXIT_VIOLATION if total else EXIT_OK


def cmd_simulate(cfg, args, out: Output) -> int:
    run = cfg.get("run", {})
    spec = cfgmod.spec_of(cfg)
    states = cfgmod.initial_states(cfg, spec, task_rng(_seed(cfg, args), 0))
    T = float(run.get("T", 100.0))
    traj = integrate(spec, states[0], T, run.get("h_step"), stride=run.get("stride"))
    n, m = spec.n, spec.m
    header = ["t"] + [f"I_{i + 1}" for i in range(n)] + [f"J_{j + 1}" for j in range(m)] + ["driftI", "energy_error"]
    ee = traj.energy_error[0]
    rows = ([t, *traj.I[0, s].tolist(), *traj.J[0, s].tolist(), traj.driftI[0, s], ee[s]]
            for s, t in enumerate(traj.times))
    out.write("trajectory.csv", _csv(cfg, header, rows))
    return EXIT_OK


def cmd_sweep(cfg, args, out: Output) -> int:
    p, run = cfg["problem"], cfg.get("run", {})
    if "eps_grid" not in p:
        raise ConfigError("problem/eps_grid: required for sweep")
    cfg_amp = dict(cfg, problem=dict(p, eps_mode="amplitude"))
    shape_spec = cfgmod.spec_of(cfg_amp, eps=1.0)
    states = cfgmod.initial_states(cfg, shape_spec, task_rng(_seed(cfg, args), 0))
    gamma = _gamma(cfg, p.get("K_max", 50))
    tau = _tau(cfg)
    schedule = None
    T = run.get("T")
    if run.get("T_schedule") == "thm1":
        ell, M = _ell_M(cfg, shape_spec)
        c1 = thm1(p["n"], tau, gamma, ell, M, shape_spec.omega_bound(), shape_spec.r0, shape_spec.s0)
        base = fourier_norm(shape_spec.harmonics, shape_spec.s0)
        mode = p.get("eps_mode", "amplitude")
        schedule = lambda e: c1.T(e * base if mode == "amplitude" else e)  # noqa: E731
        T = None
    elif T is None:
        raise ConfigError("run/T: required for sweep unless T_schedule is thm1")
    table = drift_sweep(shape_spec, p["eps_grid"], T=T, T_schedule=schedule, h_step=run.get("h_step"),
                        initial=states, gamma=gamma, tau=tau, eps_mode=p.get("eps_mode", "amplitude"))
    rows = [[r.eps, r.drift, r.bound_R, r.horizon_T, r.hypothesis_met] for r in table.rows]
    fit = table.fit.to_dict() if table.fit else None
    trailer = ["# fit: " + json.dumps(fit, sort_keys=True)]
    out.write("sweep.csv", _csv(cfg, ["eps", "drift", "bound_R", "horizon_T", "hypothesis_met"], rows, trailer))
    if out.dir:
        out.write("sweep_fit.json", dumps({"fit": fit, "config": cfg}))
    if args.strict and not all(r.hypothesis_met for r in table.rows if r.eps > 0):
        return EXIT_HYPOTHESIS
    return EXIT_OK


COMMANDS = {
    "dio": cmd_dio,
    "constants": cmd_constants,
    "cover": cmd_cover,
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nekho", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to a JSON experiment config")
        sp.add_argument("--out", help="output directory (default: stdout)")
        sp.add_argument("--seed", type=int, help="overrides geometry.seed")
        sp.add_argument("--strict", action="store_true", help="exit 4 when a hypothesis is not met")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "constants":
            sp.add_argument("--theorem", choices=["1", "2", "3", "33", "4"])
    return ap


def main(argv=None, stdout=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = cfgmod.load(args.config)
        out = Output(args.out, stdout)
        return COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResonantWitnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NekhoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
