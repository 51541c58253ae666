"""Three edges of the unit equilateral triangle under each solver.

The shortest intersecting polygon is the midpoint triangle (perimeter 1.5),
while a segment between two edges already meets all three, so the smallest
area is zero.
"""

import numpy as np

from stabhull import ConvexObject, oracle_perimeter, solve_area, solve_exact, solve_perimeter

P = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
edges = [ConvexObject.segment(P[i], P[(i + 1) % 3]) for i in range(3)]

ex = solve_exact(edges)
print(f"exact perimeter     {ex.value:.9f}")
print("vertices           ", np.round(ex.polygon.vertices, 6).tolist())

for eps in (1.0, 0.5, 0.25):
    s = solve_perimeter(edges, eps)
    print(f"fptas eps={eps:<5}    {s.value:.6f}  (bound {1.5 * (1 + eps):.3f})")

ov = oracle_perimeter(edges, grid_n=256)
print(f"oracle              {ov.value:.6f}  (slack {ov.slack:.1e})")

ar = solve_area(edges, 0.25)
print(f"area                {ar.value}  via {ar.method}")
