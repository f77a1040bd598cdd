"""Walk through the geometry of a random embedding.

A 2-dimensional search box is pushed into a 15-dimensional hypercube
through a Gaussian matrix.  Points whose image leaves the hypercube get
clamped onto it; the warp then pulls the clamped point back onto the
embedded plane and stretches it along the ray through the boundary
pivot, so no two distinct search points collapse onto one model input.
"""

import numpy as np

from rembo import back_project, convex_project, gamma_bound, sample_embedding, warp

D, d = 15, 2
e = sample_embedding(D, d, rng_seed=7)
print(f"embedding: D={e.D}, d={e.d}, seed={e.seed}")
print(f"coverage half-width gamma = {gamma_bound(e):.4f}")
print(f"box half-width sqrt(d)   = {np.sqrt(d):.4f}")
print()

# march along a fixed direction; small steps stay inside the hypercube,
# larger ones clamp
direction = np.array([0.8, -0.6])
print(f"{'radius':>7} {'inside?':>8} {'|image|_inf':>12} {'|warp - image|':>15}")
for r in (0.2, 0.6, 1.0, 1.8, 3.0, 6.0):
    y = r * direction
    image = y @ e.A.T
    inside = bool(np.all(np.abs(image) <= 1.0))
    w = warp(e, y)
    print(f"{r:7.1f} {str(inside):>8} {np.max(np.abs(image)):12.4f} "
          f"{np.linalg.norm(w - convex_project(image)):15.4f}")

print()
print("outside the cube, the warp stays on the embedded plane while the")
print("clamped point generally leaves it:")
y = 6.0 * direction
clamped = convex_project(y @ e.A.T)
w = warp(e, y)
# distance of each candidate from the plane = norm of its component
# orthogonal to the span of A
for name, point in (("clamped", clamped), ("warped", w)):
    off_plane = np.linalg.norm(point - back_project(e, point))
    print(f"  {name}: distance from the embedded plane = {off_plane:.2e}")
