#!/usr/bin/env python3
"""Networks as resistor circuits: exact identities, no randomness.

Walks through the electrical toolbox: effective resistance from the
grounded Laplacian, the commute-time identity, Foster's theorem, the
star-mesh vertex elimination, and quotient (glued-set) resistances.
"""

import numpy as np

from covertime.network import (
    build_network, complete_graph, grid_graph, path_graph, quotient,
    star_mesh_reduce,
)
from covertime.resistance import (
    build_oracle, escape_probability, foster_residual, hitting_times,
    r_eff_set,
)

print("=== series and parallel sanity ===")
path = path_graph(3)
oracle = build_oracle(path, v0=0)
print(f"path 0-1-2, unit conductances: R_eff(0,2) = {oracle.r_eff(0, 2):.6f}"
      " (two unit resistors in series)")
par = build_network([(0, 1, 1.0), (0, 1, 1.0)])  # merged to c = 2
print(f"doubled edge: R_eff(0,1) = {build_oracle(par).r_eff(0, 1):.6f}"
      " (two unit resistors in parallel)")

print()
print("=== commute time = total conductance x resistance ===")
table = hitting_times(path)
kappa = table.H[0, 2] + table.H[2, 0]
print(f"H(0,2) = {table.H[0, 2]:.4f},  H(2,0) = {table.H[2, 0]:.4f}")
print(f"kappa(0,2) = {kappa:.4f}  vs  C * R_eff = "
      f"{path.total_conductance * oracle.r_eff(0, 2):.4f}")

print()
print("=== Foster's theorem: sum of c_e R_eff(e) = n - 1 ===")
for net, name in [(complete_graph(5), "K_5"), (grid_graph(4), "grid 4x4")]:
    print(f"{name}: residual = {foster_residual(net):+.3e}")

print()
print("=== star-mesh elimination preserves the resistance geometry ===")
grid = grid_graph(3)
victim = 4  # the center
reduced = star_mesh_reduce(grid, victim)
keep = [x for x in range(grid.n) if x != victim]
before = build_oracle(grid).r_eff_matrix()[np.ix_(keep, keep)]
after = build_oracle(reduced).r_eff_matrix()
print(f"eliminated the center of a 3x3 grid: {grid.n} -> {reduced.n} vertices,"
      f" {grid.edge_count} -> {reduced.edge_count} edges")
print(f"max |R_eff drift| among survivors = {np.abs(after - before).max():.3e}")

print()
print("=== resistance to a set, via the quotient network ===")
q = quotient(path, {0, 2})
print(f"gluing {{0, 2}} of the 3-path gives edges {list(q.result.edges())}")
print(f"R_eff(1, {{0,2}}) = {r_eff_set(path, 1, {0, 2}):.6f}"
      " (the two unit edges in parallel)")

print()
print("=== escape probabilities ===")
k3 = complete_graph(3)
print(f"K_3: P_0(leave 0 and hit 1 before returning) = "
      f"{escape_probability(k3, 0, 1):.4f}  (= 1 / (c_0 R_eff))")
