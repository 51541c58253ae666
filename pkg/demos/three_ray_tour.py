"""Ordered visits to three rays, where the visiting order matters.

Starting just below the origin, the tour s, r1, r2, r3, s has a closed form
length; swapping the first two rays makes it longer than 7, and letting a
tour merely reach each ray's supporting line drops it to 2 + 2*eps.
"""

import math

import numpy as np

from stabhull import ConvexObject, oracle_tour, tour

eps = 0.05
r1 = ConvexObject.ray((-1.0, 0.0), (-5.0, -4.0))
r2 = ConvexObject.ray((-1.0, 1.0), (1.0, 0.0))
r3 = ConvexObject.ray((2.0, 0.0), (1.0, 0.0))
s = np.array([0.0, -eps])

closed_form = math.sqrt(1 + eps**2) + 2 * math.sqrt(1.5**2 + 1) + math.sqrt(4 + eps**2)

t = tour(s, [r1, r2, r3], s)
print(f"order 1,2,3        {t.length:.9f}  closed form {closed_form:.9f}  exact={t.exact}")
print("waypoints         ", np.round(t.waypoints, 6).tolist())

o = oracle_tour(s, [r1, r2, r3], s, spacing=1e-3)
print(f"sampled oracle     {o.value:.6f}  (slack {o.slack:.1e})")

t = tour(s, [r2, r1, r3], s)
print(f"order 2,1,3        {t.length:.6f}")

t = tour(s, [r1, r2, r3], s, pseudo=True)
print(f"pseudo tour        {t.length:.9f}  (2 + 2 eps = {2 + 2 * eps})")
