"""How attack difficulty scales with latent dimensionality.

Rebuilds the testbed oracle at several latent widths and reruns the same
attack budget against each. Two effects compete: at low width the five
prototypes crowd each other and the oracle itself is ambiguous near any
one of them, while at high width the reward signal thins out for a fixed
query budget. On this slice the 2-dim case is the hard one.
"""

import numpy as np

from latinv import TrainerConfig, evaluate_distribution, make_testbed_oracle, run_attack
from latinv.distributions import LatentDistribution
from latinv.evaluation import eval_rng

ROUNDS = 800
SEED = 1
LABEL = 0

print(f"Fixed budget: {ROUNDS} rounds, seed {SEED}, label {LABEL}.\n")
for dim in (2, 4, 8, 16):
    oracle = make_testbed_oracle(latent_dim=dim)
    config = TrainerConfig(latent_dim=dim, max_rounds=ROUNDS, seed=SEED)
    report = run_attack(config, oracle, LABEL)
    dist = LatentDistribution(
        np.asarray(report.final["mu"]), np.asarray(report.final["sigma"])
    )
    sheet = evaluate_distribution(
        dist, oracle, LABEL, eval_rng(SEED, LABEL), accuracy_samples=500,
        ranking_samples=2000,
    )
    print(f"  dim {dim:2d}: accuracy {sheet.distributional_accuracy:.3f}  "
          f"top-1 {sheet.top1:.3f}  queries {report.queries['total']}")
