"""Where does the second mutation type appear, relative to the first?

When the second mutation rate is high, the first type-2 mutation lands
inside the still-small first type-1 ball.  On the kappa_2 = 1/(mu_2
alpha^d)^(1/(d+1)) length scale the distance between the two origins has
an explicit limit distribution; the waiting gap sigma_2 - sigma_1 has an
explicit density on the same scale.  This script checks both against a
simulation, excluding replicates where a second same-type mutation broke
the single-nest picture before sigma_2.

Run:  python demos/distance_and_gap_laws.py
"""

import numpy as np

from torusmut import Guards, ModelParams
from torusmut.asymptotics import distance_cdf, gap_density, kappa_j
from torusmut.stats import ks_statistic, run_replicates

params = ModelParams(d=1, L=1e4, alpha=1e4, mu=(1e-2, 1e2))
kappa2 = kappa_j(params, 2)
print(f"model: {params.mu=}, alpha={params.alpha:g} -> kappa_2 = {kappa2:g}\n")

records = run_replicates(params, master_seed=3, guards=Guards(), count=800)

kept = [r for r in records if all(r.sigma2_censored)]
print(f"{len(kept)} of {len(records)} replicates kept "
      "(no second same-type mutation before sigma_2)")

distances = np.array([r.distances[(1, 2)] for r in kept]) / (params.alpha * kappa2)
ks = ks_statistic(distances, lambda s: distance_cdf(params.d, s))
print(f"rescaled origin distance: KS vs limit law = {ks:.4f} "
      f"(1% critical {1.63 / np.sqrt(len(kept)):.4f})")

for q in (0.25, 0.5, 0.75):
    emp = float(np.quantile(distances, q))
    print(f"  empirical {int(q*100):2d}% quantile {emp:.3f} -> "
          f"limit CDF there = {distance_cdf(params.d, emp):.3f}")

gaps = np.array([r.sigma[1] - r.sigma[0] for r in kept]) / kappa2
print(f"\nrescaled waiting gap (sigma_2 - sigma_1)/kappa_2: "
      f"mean {gaps.mean():.3f} vs sqrt(pi)/2 = {np.sqrt(np.pi)/2:.3f}")
ts = np.array([0.25, 0.5, 1.0, 1.5])
hist = [float(np.mean((gaps >= t - 0.125) & (gaps < t + 0.125)) / 0.25)
        for t in ts]
print("gap density, empirical vs exact:")
for t, h in zip(ts, hist):
    print(f"  t={t:4.2f}: {h:.3f} vs {gap_density(params.d, t):.3f}")
