"""Audit of the hand-rolled backprop against finite differences.

Runs the stock gradient check (random shapes, random points, every
parameter block compared to a central-difference estimate), then
deliberately corrupts one layer's gradient to show the audit actually
catches wrong math.
"""

from latinv import gradient_check
from latinv.cli import GRADCHECK_TOLERANCE

result = gradient_check(trials=20, seed=0)
print(f"Stock audit over 20 nets: {result}")
print(f"Within tolerance {GRADCHECK_TOLERANCE:.0e}:", result.worst <= GRADCHECK_TOLERANCE)

# Same audit with layer 0's weight gradient deliberately doubled: the
# mismatch should be order one, not order 1e-9.
broken = gradient_check(trials=5, seed=0, corrupt_layer=0)
print(f"\nWith layer 0 corrupted: {broken}")
print("Corruption detected:", broken.worst > GRADCHECK_TOLERANCE)
