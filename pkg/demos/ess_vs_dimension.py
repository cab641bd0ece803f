"""ESS per sweep as irrelevant features are added.

With n fixed and features beyond the informative block set to zero, the
posterior of the extra coefficients equals the prior and mixes instantly.
The median ESS therefore rises with d while the slowest coordinate does
not improve.
"""

import numpy as np

from cggibbs import GlmModel, SyntheticSpec, ess_report, generate_synthetic, run_chain
from cggibbs.glm_core import Dataset

n, k, T, warmup = 32, 30, 2000, 200
full, _ = generate_synthetic(SyntheticSpec(n=n, d=256, scenario="prefix_significant_3",
                                           n_significant=k, seed=4))
print(f"{'d':>5} {'median ESS/sweep':>17} {'min ESS/sweep':>14}")
for d in (k + 1, 64, 128, 256):
    data = Dataset(full.X[:, :d], full.y, has_intercept=True)
    tr = run_chain(GlmModel(), data, T=T, warmup=warmup, seed=11)
    rep = ess_report(tr, float(np.sum(tr.sweep_times)))
    print(f"{d:>5} {rep.median_ess / rep.T_kept:>17.3f} {rep.min_ess / rep.T_kept:>14.3f}")
