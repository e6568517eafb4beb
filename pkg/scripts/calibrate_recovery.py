"""Replicate the recovery experiments behind the acceptance thresholds.

Runs ``--replicates`` independent default-sized simulations for each scenario
(drift, egocentric alpha=-0.8, content beta=0.8), fits them on the default
grid and prints the per-replicate pass rates and medians.

    python scripts/calibrate_recovery.py --replicates 50
"""

import argparse

import numpy as np

from culturesel import ModelParams, SimConfig, bayes_factors, default_grid, extract_data_structures, fit_all, simulate
from culturesel.bayes import lower_median

SCENARIOS = {
    "drift": ModelParams(4, 0.0, 0.0, 0.01),
    "egocentric": ModelParams(4, -0.8, 0.0, 0.01),
    "content": ModelParams(4, 0.0, 0.8, 0.01),
}


def run(params: ModelParams, seed: int):
    log, quality, _ = simulate(SimConfig(true_params=params, seed=seed))
    results = fit_all(extract_data_structures(log), default_grid(), quality)
    bests = [r.best[0] for r in results]
    bfs = [bayes_factors(r.subfamily_maxima) for r in results]
    return {
        "alpha_negative": np.mean([b.conformity < 0 for b in bests]),
        "beta_ge_half": np.mean([b.content >= 0.5 for b in bests]),
        "median_bf_conformity": lower_median([b.bf_conformity for b in bfs]),
        "median_bf_content": lower_median([b.bf_content for b in bfs]),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--replicates", type=int, default=50)
    parser.add_argument("--seed", type=int, default=1000)
    args = parser.parse_args()
    for name, params in SCENARIOS.items():
        stats = [run(params, args.seed + r) for r in range(args.replicates)]
        print(f"[{name}] {params}")
        for key in stats[0]:
            values = np.array([s[key] for s in stats])
            print(f"  {key:22s} min={values.min():.4g} median={np.median(values):.4g} max={values.max():.4g}")


if __name__ == "__main__":
    main()
