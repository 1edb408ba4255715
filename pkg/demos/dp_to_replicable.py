"""Turn the exponential mechanism over point functions into a replicable weak learner."""

from __future__ import annotations

import numpy as np

from replicable import (
    FiniteDistribution,
    PointFunction,
    SeedStream,
    all_points,
    dp_ratio_table,
    dp_to_replicable_weak,
    exp_mech_learner,
    point_function_class,
)

d = 4
cls = point_function_class(d)
for eps in (0.1, 1.0):
    small = point_function_class(1)
    table = dp_ratio_table(small, all_points(1), 5, eps)
    print(f"eps={eps}: worst neighbouring ratio {float(table['max_ratio']):.4f} <= {float(table['bound']):.4f}")

X = all_points(d)
target = PointFunction(6, d)
D = FiniteDistribution(X, np.full(len(X), 1 / len(X)), target.predict(X))
hs = []
for run in ("a", "b"):
    rng = SeedStream.data_root(4).derive(run).generator()
    h = dp_to_replicable_weak(exp_mech_learner, cls, D, 0.2, 0.05, SeedStream(4), rng, m0=10)
    hs.append(h.serialize())
    print(f"run {run}: {h.serialize()} error {D.error(h):.4f}")
print("identical outputs:", hs[0] == hs[1])
