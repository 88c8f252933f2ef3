"""Centralized critics versus independent learners, desk-scale rerun.

Trains both agent wirings on the same seeds in the regime where the
difference shows: a sharper oracle (temperature 0.5) and exploration noise
held at 0.2 so each agent's actions stay unpredictable from state alone.
Scores each run by the accuracy of its final distribution, the same
headline number `latinv bench-agents` prints. Takes about half a minute;
configs/bench.json is the full seven-seed version of this comparison.
"""

import numpy as np

from latinv import TrainerConfig, evaluate_distribution, run_attack
from latinv.distributions import LatentDistribution
from latinv.evaluation import eval_rng
from latinv.oracles import make_testbed_oracle

LABEL = 0
ROUNDS = 1000
SEEDS = (1, 2, 3)


def final_accuracy(mode: str, seed: int) -> float:
    oracle = make_testbed_oracle(temperature=0.5)
    config = TrainerConfig(max_rounds=ROUNDS, noise_end=0.2, mode=mode, seed=seed)
    report = run_attack(config, oracle, LABEL)
    dist = LatentDistribution(
        np.asarray(report.final["mu"]), np.asarray(report.final["sigma"])
    )
    sheet = evaluate_distribution(
        dist, oracle, LABEL, eval_rng(seed, LABEL),
        accuracy_samples=500, ranking_samples=2000,
    )
    return sheet.distributional_accuracy


def main() -> None:
    print(f"{ROUNDS} rounds per run, {len(SEEDS)} seeds per mode, label {LABEL}.\n")
    results: dict[str, list[float]] = {"maddpg": [], "independent": []}
    for mode in results:
        for seed in SEEDS:
            acc = final_accuracy(mode, seed)
            results[mode].append(acc)
            print(f"  {mode:12s} seed {seed}: final accuracy {acc:.3f}")
    print()
    for mode, vals in results.items():
        print(f"{mode:12s} mean accuracy: {np.mean(vals):.3f}")
    gap = np.mean(results["maddpg"]) - np.mean(results["independent"])
    print(f"\nCentralized advantage on this slice: {gap:+.3f}")


if __name__ == "__main__":
    main()
