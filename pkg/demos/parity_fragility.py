"""Gaussian elimination versus the replicable affine-parity learner.

Both learn the same parity on a distribution whose last coordinate is almost
always 1. The naive learner fills free variables with private coins and so
often returns different (equally consistent) hypotheses across runs.
"""

from __future__ import annotations

from replicable.bench import ExperimentConfig, estimate_replicability

for name, dist in (("aff-parity", {"d": 10}), ("ge-nonreplicable", {"d": 10, "n": 200})):
    report = estimate_replicability(ExperimentConfig(name, distribution=dist, trials=200, seed=2))
    s = report.summary()
    print(f"{name:<17} rho_hat={s['rho_hat']:.3f} wilson95={s['wilson95'][0]:.3f}..{s['wilson95'][1]:.3f} success={s['success_rate']:.3f}")
