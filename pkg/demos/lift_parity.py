"""Learn a depth-1 tree for a skewed product distribution, then lift a parity learner.

The affine-parity learner assumes uniform marginals. Lifting runs it inside
each leaf after re-randomizing the split coordinate, and the result is
replicable end to end.
"""

from __future__ import annotations

from replicable import AffineParityHypothesis, BudgetLedger, SeedStream, affine_parity_learner, lift_end_to_end
from replicable import skewed_parity_distribution

d, alpha, beta, rho = 8, 0.25, 0.1, 0.5
target = AffineParityHypothesis(0b10110101, 1, d)
D = skewed_parity_distribution(d, 200, target)

outputs = []
for run in ("a", "b"):
    rng = SeedStream.data_root(3).derive(run).generator()
    with BudgetLedger() as ledger:
        h = lift_end_to_end(D, affine_parity_learner(), 1, alpha, beta, rho, SeedStream(3), rng)
    outputs.append(h.serialize())
    print(f"run {run}: error {D.error(h):.4f}, replicability charged {ledger.total:.3f}")
    for label, spent in sorted(ledger.by_prefix().items()):
        print(f"    {label:<20} {spent:.4f}")
print("identical outputs:", outputs[0] == outputs[1])
