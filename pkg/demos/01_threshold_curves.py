"""Closed-form complexity curves for thresholding-type procedures.

Walks the exact df/sdf formulas for best subset and relaxed lasso on an
orthogonal design through three signal regimes, then writes an SVG of the
search-cost curves against the expected active-set size.
"""

import numpy as np

from dfsearch import (
    df_subset_orthogonal,
    expected_active_hard,
    sdf_dense,
    sdf_null,
    sdf_sparse,
    svg_plot,
    threshold_for_expected_active,
)

p, sigma = 100, 1.0

# Null signal: the search cost rises and falls with the penalty, peaking
# near half the noise variance at a value just under half of p.
lams = np.linspace(0.0, 3.0, 3001)
null_vals = sdf_null(p, sigma, lams)
k = int(np.argmax(null_vals))
print(f"null signal: sdf peaks at lambda={lams[k]:.4f} with value {null_vals[k]:.3f}")
print(f"  (selected size there: "
      f"{expected_active_hard(np.zeros(p), sigma, np.sqrt(2 * lams[k])):.2f} of {p})")

# Sparse and dense signals change the shape: a strong sparse signal makes
# the search nearly free exactly when the penalty recovers its support.
beta_sparse = np.concatenate([np.full(10, 8.0), np.zeros(p - 10)])
t_at_10 = threshold_for_expected_active(beta_sparse, sigma, 10.0)
print(f"sparse rho=8: at the oracle size E|A|=10, "
      f"sdf={sdf_sparse(beta_sparse, sigma, 0.5 * t_at_10**2):.4f} (nearly free)")

beta_dense = np.ones(p)
# The dense curve is best viewed against the expected selected size.
targets = np.linspace(0.5, p - 0.5, 200)
series = []
for label, beta in (("null", np.zeros(p)), ("sparse rho=8", beta_sparse),
                    ("dense rho=1", beta_dense)):
    ts = np.array([threshold_for_expected_active(beta, sigma, x) for x in targets])
    vals = sdf_dense(beta, sigma, 0.5 * ts**2) if label.startswith("dense") else (
        sdf_null(p, sigma, 0.5 * ts**2) if label == "null"
        else sdf_sparse(beta, sigma, 0.5 * ts**2)
    )
    series.append({"label": label, "x": targets, "y": np.asarray(vals, dtype=float)})
    print(f"{label}: max sdf {np.max(vals):.2f} at E|A|={targets[np.argmax(vals)]:.1f}")

with open("threshold_curves.svg", "w", encoding="utf-8") as fh:
    fh.write(svg_plot(series, title="search cost by selected size (p=100)",
                      xlabel="expected active-set size", ylabel="sdf"))
print("wrote threshold_curves.svg")

# df always decomposes as expected size plus search cost, exactly.
cp = df_subset_orthogonal(np.zeros(p), sigma, 0.5)
assert cp.df == cp.expected_active + cp.sdf
print(f"at lambda=0.5: df={cp.df:.3f} = E|A|={cp.expected_active:.3f} + sdf={cp.sdf:.3f}")
