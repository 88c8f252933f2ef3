"""A look at the built-in prototype oracle: what the attacker is up against.

The testbed oracle holds one Gaussian-drawn prototype per class and answers
queries with a softmax over negative squared distances. Nothing else about
it is visible to the attack; every probe goes through query() and is
counted in the ledger.
"""

import numpy as np

from latinv import make_testbed_oracle, testbed_prototypes
from latinv.oracles import log_target_prob

oracle = make_testbed_oracle()
protos = testbed_prototypes(oracle.latent_dim, oracle.num_classes, seed=101)
print(f"Testbed: {oracle.num_classes} classes in a {oracle.latent_dim}-dim latent space, "
      f"temperature {oracle.spec.temperature}.")
print("Prototype norms:", np.round(np.linalg.norm(protos, axis=1), 3))

# Query each prototype itself: the oracle should be most confident there.
probs = oracle.query(protos)
print("\nProbability of own class at each prototype:",
      np.round(probs[np.arange(oracle.num_classes), np.arange(oracle.num_classes)], 4))
print("Rows sum to one:", np.allclose(probs.sum(axis=1), 1.0))

# Midpoints between prototypes are ambiguous; codes dominated by one
# prototype push the rest to the 1e-12 floor so logs stay finite.
mid = (protos[0] + protos[1]) / 2.0
print("\nMidpoint of prototypes 0 and 1:", np.round(oracle.query(mid)[0], 4))
far = np.full(oracle.latent_dim, 40.0)
row = oracle.query(far)[0]
print("Code far out along the diagonal:", row)
print("log prob of a floored class:", log_target_prob(row, 1))

print(f"\nQuery ledger: {oracle.ledger.total_codes_scored} codes scored "
      f"(5 prototypes + 1 midpoint + 1 far code).")
