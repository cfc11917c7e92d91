"""Randomization inference: exact-in-design p-values for spillovers.

Under the sharp null of no spillover effects, the instrument peers'
assignments can be redrawn freely while outcomes stay fixed, so the
distribution of any statistic is known by simulation.  This demo runs
the four statistics on one dataset without effects and one with.

Run:  python demos/randomization_test.py
"""

from spillnet import ExposureMap, NetworkDgpConfig, frt, gen_network

B = 500

for h in (0, 1):
    ds = gen_network(NetworkDgpConfig(n=400, h=h, c=0.5, seed=42))
    label = "no spillover effects" if h == 0 else "spillover effects present"
    print(f"dataset with {label} (n = 400):")
    for stat in ("tsls", "wls", "itt", "ittc"):
        result = frt(ds, ExposureMap.IDENTITY, stat, b=B, p1j=0.5, seed=7)
        mean, sd, lo, hi = result.draws_summary
        print(
            f"  {stat:>4}: observed {result.observed:+8.4f}  "
            f"p = {result.p_value:6.4f}  null draws ~ {mean:+.4f} +- {sd:.4f}"
        )
    print()

print("p-values are valid by construction for any statistic; the")
print("complier-weighted statistic concentrates power where the")
print("instrument actually moves exposure.")
