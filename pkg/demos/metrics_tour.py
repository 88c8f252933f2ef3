"""Tour of the evaluation metrics on hand-checkable inputs.

Each metric is shown on a case small enough to verify mentally: a
point-mass distribution parked on a class prototype, a reconstruction with
a known mean-squared error, and a tiny feature set for the nearest-neighbor
distance.
"""

import numpy as np

from latinv import (
    LatentDistribution,
    confidence_histogram,
    distributional_accuracy,
    knn_feature_distance,
    make_testbed_oracle,
    psnr,
    testbed_prototypes,
    topk_accuracy,
)
from latinv.evaluation import eval_rng

oracle = make_testbed_oracle()
protos = testbed_prototypes(8, 5, seed=101)

# A distribution with negligible spread sitting exactly on prototype 2
# classifies as class 2 on every draw.
on_target = LatentDistribution(protos[2], np.full(8, 1e-3))
rng = eval_rng(0, 2)
acc = distributional_accuracy(on_target, oracle, 2, n_samples=500, rng=rng)
print(f"Accuracy of a point mass on its own prototype: {acc}")

top1 = topk_accuracy(on_target, oracle, 2, k_rank=1, n_samples=500, rng=eval_rng(0, 2))
top5 = topk_accuracy(on_target, oracle, 2, k_rank=5, n_samples=500, rng=eval_rng(0, 2))
print(f"Top-1 {top1}, top-5 {top5} (top-5 of 5 classes is trivially 1.0)")

hist = confidence_histogram(on_target, oracle, 2, n_samples=500, rng=eval_rng(0, 2))
print("Confidence histogram:", dict(zip(hist.thresholds, hist.fractions)))

# The same distribution aimed at the wrong label scores zero.
wrong = distributional_accuracy(on_target, oracle, 0, n_samples=500, rng=eval_rng(0, 0))
print(f"Same distribution judged against label 0: {wrong}")

# psnr: identical arrays give infinity; a known perturbation gives a
# round number. 16 entries differing by 0.125 out of 25 -> MSE 0.01 -> 20 dB.
a = np.zeros(25)
b = a.copy()
b[:16] = 0.125
print(f"\npsnr(x, x) = {psnr(a, a)}")
print(f"psnr with MSE 0.01 at peak 1.0 = {psnr(a, b)} dB")

# knn distance: Euclidean distance from each generated row to its nearest
# private row, averaged. The origin against (3,4) and (6,8) picks the
# 3-4-5 triangle: exactly 5.0.
gen = np.array([[0.0, 0.0]])
priv = np.array([[3.0, 4.0], [6.0, 8.0]])
print(f"knn feature distance origin vs {{(3,4),(6,8)}}: {knn_feature_distance(gen, priv)}")
