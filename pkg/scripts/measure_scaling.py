#!/usr/bin/env python3
"""Relative measure of the rank-1 zone union versus K, and of the
non-Diophantine set versus gamma'; fits log-log slopes of both."""

import argparse
import json
from pathlib import Path

from nekho import config as cfgmod
from nekho.diophantine import best_gamma
from nekho.fitting import fit_exponent
from nekho.geometry import Covering, covering_params, exact_measure_1d, non_dio_slabs, z1_slabs, zone_measure_mc

HERE = Path(__file__).resolve().parent


def run(cfg: dict, gamma_grid) -> dict:
    p, g = cfg["problem"], cfg.get("geometry", {})
    n, m = p["n"], p["m"]
    alpha = cfgmod.alpha_of(cfg).alpha
    tau = float(p.get("tau", m - 1))
    gamma = float(p["gamma"]) if "gamma" in p else best_gamma(alpha, tau, 400).gamma
    box = (g["box"]["lo"], g["box"]["hi"])
    N, seed = int(g.get("samples", 100_000)), int(g.get("seed", 0))
    z1 = []
    for K in g["K_grid"]:
        slabs = z1_slabs(Covering.build(alpha, covering_params(n, m, K, gamma, tau, 1.0, 1.0)))
        est = zone_measure_mc(slabs, box, N, seed, task=int(K))
        row = {"K": K, "fraction": est.fraction, "stderr": est.stderr}
        if n == 1:
            row["exact"] = exact_measure_1d(slabs, box[0][0], box[1][0])
        z1.append(row)
    comp = []
    for gp in gamma_grid:
        slabs = non_dio_slabs(n, alpha, gp, float(p.get("tau_prime", n + m)), int(p.get("K_max", 60)))
        est = zone_measure_mc(slabs, box, N, seed, task=100)
        comp.append({"gamma_prime": gp, "fraction": est.fraction, "stderr": est.stderr})
    return {
        "gamma": gamma, "tau": tau,
        "z1": z1, "z1_fit": fit_exponent([(r["K"], r["fraction"]) for r in z1]).to_dict(),
        "z1_target_slope": -((n + 1) * tau + 1),
        "complement": comp,
        "complement_fit": fit_exponent([(r["gamma_prime"], r["fraction"]) for r in comp]).to_dict(),
    }


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(HERE / "configs" / "measure_scaling.json"))
    ap.add_argument("--gammas", type=float, nargs="*", default=[0.02, 0.05, 0.1, 0.2])
    a = ap.parse_args()
    print(json.dumps(run(cfgmod.load(a.config), a.gammas), indent=2, sort_keys=True))
