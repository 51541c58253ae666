"""Exact and approximate perimeters on random segment sets, next to the LP oracle."""

import time

import numpy as np

from stabhull import ConvexObject, oracle_perimeter, solve_exact, solve_perimeter

rng = np.random.default_rng(7)
print(f"{'n':>2} {'exact':>9} {'eps=0.25':>9} {'oracle':>9} {'ratio':>6} {'secs':>6}")
for _ in range(6):
    n = int(rng.integers(3, 6))
    objs = [ConvexObject.segment(rng.random(2), rng.random(2)) for _ in range(n)]
    t0 = time.perf_counter()
    e = solve_exact(objs).value
    p = solve_perimeter(objs, 0.25).value
    o = oracle_perimeter(objs, grid_n=512).value
    ratio = p / e if e > 0 else 1.0
    print(f"{n:>2} {e:9.5f} {p:9.5f} {o:9.5f} {ratio:6.3f} {time.perf_counter() - t0:6.2f}")
