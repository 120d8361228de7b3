"""Preconditioning quality from row-sampled Gram matrices.

For a tall design matrix, the optimal right preconditioner can be computed
from a small without-replacement row sample: the sampled Gram estimates the
full one. This sweep shows how the preconditioned condition number and the
Gram estimation gap behave as the sampling ratio grows.
"""

import numpy as np

from optiprecond import RectMatrix, gram_matrix, sampling_sweep
from optiprecond.fixtures import gauss_cov_design
from optiprecond.optimal import OptimalRequest, optimal_right

a = RectMatrix(gauss_cov_design(123, m=2000, n=10))
_, full = optimal_right(gram_matrix(a), OptimalRequest(method="dsdp"))
print(f"full-matrix optimum: kappa = {full.kappa_after:.3f} "
      f"(unpreconditioned {full.kappa_before:.1f})")
print()

ratios = [0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0]
points = sampling_sweep(a, ratios, seed=7)
print(f"{'ratio':>6s} {'rows':>6s} {'gram gap':>12s} {'kappa':>10s}")
for p in points:
    rows = int(round(p.ratio * a.rows))
    print(f"{p.ratio:6.2f} {rows:6d} {p.gram_gap:12.1f} "
          f"{p.kappa_preconditioned:10.3f}")

print()
print("Already a few percent of the rows give a preconditioner close to")
print("the full-matrix optimum; the ratio-1.0 point recovers it exactly.")

# median quality at 5% across independent sampling seeds
kappas = [sampling_sweep(a, [0.05], seed=s)[0].kappa_preconditioned
          for s in range(20)]
print(f"median kappa at ratio 0.05 over 20 seeds: {np.median(kappas):.3f}")
