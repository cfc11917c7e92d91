"""Small-scale runs of the two Monte Carlo drivers.

The estimation study reports bias, RMSE, and 95% interval coverage of
the spillover coefficient against its complier-average target (1.5 when
effects are on, 0 for the naive column).  The testing study reports
rejection frequencies of the randomization test.  Full-scale settings
(1000 replications, 500 draws) reproduce the benchmark tables; this demo
uses lighter settings to finish in seconds.

Run:  python demos/monte_carlo.py
"""

from spillnet import NetworkDgpConfig, mc_estimation, mc_frt
from spillnet.harness import format_mc_est_table, format_mc_frt_table

est_grid = [NetworkDgpConfig(n=n, h=h, c=c) for n in (400,) for h in (0, 1) for c in (0.3, 0.6)]
est = mc_estimation(est_grid, reps=200, master_seed=1)
print("estimator performance (200 replications):")
print(format_mc_est_table(est))
print()

frt_grid = [NetworkDgpConfig(n=400, h=h, c=0.5) for h in (0, 1)]
frt_report = mc_frt(frt_grid, reps=200, b=200, master_seed=1)
print("randomization-test rejection rates (200 replications, 200 draws):")
print(format_mc_frt_table(frt_report))
