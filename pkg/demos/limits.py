"""Two deterministic limits, both landing on the polar projection body.

As H increases to 1/2 the rescaled variance (1 - 2H) E xi(z)^2 tends to the
gauge of the polar projection body scaled by 1/2.  For the truncated field
with exponent p the rescaled variance C^(1 - 2p) E eta(z)^2 tends to the gauge
of the same body scaled by p - 1/2.  For the unit square at z = e1 both
limits equal 2.

Run: python3 demos/limits.py
"""

from minkfield import geometry as g
from minkfield import poisson as ps

K = g.unit_square()
z = [1.0, 0.0]
polar = g.PolarProjectionGauge(K)

print("H      (1-2H) Var xi")
for H in (0.4, 0.45, 0.49, 0.499, 0.4999):
    print(f"{H:<6} {(1 - 2 * H) * ps.variance_quadrature(K, H, z):.6f}")
print(f"limit  {g.ScaledBody(0.5, polar).gauge(z):.6f}\n")

p = 1.0
print("C       C^(1-2p) Var eta")
for C in (10.0, 100.0, 1000.0, 10_000.0):
    print(f"{C:<7g} {C ** (1 - 2 * p) * ps.truncated_variance_quadrature(K, p, C, z):.6f}")
print(f"limit   {g.ScaledBody(p - 0.5, polar).gauge(z):.6f}")
