"""The price of model search, exactly and by simulation.

Search degrees of freedom (sdf) is the df of the least-squares refit on a
procedure's selected variables minus the expected rank of the selected
design: the complexity spent choosing the model rather than fitting it.
This demo shows the exact subset/relaxed-lasso equivalence on orthogonal
designs and measures sdf for best subset on a correlated design, where
no closed form exists.
"""

import numpy as np

from dfsearch import (
    FitProcedure,
    RngSpec,
    SignalSpec,
    df_relaxed_lasso_orthogonal,
    df_subset_orthogonal,
    estimate_sdf,
    gen_block_design,
    threshold_for_expected_active,
)

# On orthogonal designs, best subset at penalty t^2/2 and relaxed lasso at
# penalty t select the same models, so their search costs coincide.
mu = np.concatenate([np.full(5, 3.0), np.zeros(45)])
print("matched selected size -> identical search cost (orthogonal case):")
for target in (2.0, 5.0, 10.0, 25.0):
    t = threshold_for_expected_active(mu, 1.0, target)
    a = df_subset_orthogonal(mu, 1.0, 0.5 * t * t)
    b = df_relaxed_lasso_orthogonal(mu, 1.0, t)
    print(f"  E|A|={target:5.1f}: subset sdf={a.sdf:8.4f}  "
          f"relaxed sdf={b.sdf:8.4f}  gap={abs(a.sdf - b.sdf):.2e}")

# Correlated designs have no closed form; estimate_sdf refits the selected
# model per replication and subtracts the average selected rank.
design = gen_block_design(25, 8, [4, 4], 0.5, 0.8, RngSpec(seed=3, stream_id=0))
beta = np.zeros(8)
beta[[0, 4]] = 1.5
signal = SignalSpec.from_coefficients(design, beta, 1.0)

print("\nbest subset on two correlated blocks (n=25, p=8):")
for lam in (0.2, 0.6, 1.5, 3.0):
    proc = FitProcedure(kind="best-subset", lam=lam, design=design)
    est = estimate_sdf(proc, signal, reps=1500, seed=4)
    print(f"  lambda={lam:4.1f}: sdf = {est.value:6.3f} (se {est.std_error:.3f}), "
          f"mean selected size {est.mean_active:.2f}")

print("\nsearch cost stays positive even where the ordinary df would "
      "suggest a small model: selection itself spends fitting capacity.")
