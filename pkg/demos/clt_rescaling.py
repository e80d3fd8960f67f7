"""Gaussian behaviour of the rescaled Poisson field a^(-H) xi(a z).

At one point xi(z) is a difference of two independent Poisson counts, so the
excess kurtosis of the rescaled value is exactly 1 / (a^(2H) V) and shrinks
as a grows.  The sup distance to the normal law shrinks with it.

Run: python3 demos/clt_rescaling.py
"""

from minkfield import geometry as g
from minkfield import verify as vf

rep = vf.clt_rescale_report(g.unit_square(), 0.25, (1, 4, 16, 64), [[1.0, 0.0]], seed=3, n_paths=20_000,
                            gaussian_reference=False)
print(" a   variance  kurtosis (exact)   KS distance")
for a in (1, 4, 16, 64):
    var = rep[f"a={a}_z0_variance"].value
    ku = rep[f"a={a}_z0_excess_kurtosis"]
    ks = rep[f"a={a}_z0_ks_distance"].value
    print(f"{a:2d}   {var:7.3f}   {ku.value:6.3f} ({ku.target:.3f})    {ks:.3f}")
