"""
Harmonic measure seen from far away
===================================

Where does a walker released deep in the graph first touch a finite
target set?  On a transient graph the answer stabilizes as the release
point recedes, and that limit is what a pass through infinity uses to
re-enter.  The solver computes it by escalating finite truncations
until the rows stop moving.
"""

import freewalk as fw

# On the 3-regular tree the hitting law of {2, 3, 9} from vertex 4 is
# exactly (1/5, 1/5, 3/5): vertex 4 sits between target 9 and the
# pair {2, 3} upstream.
oracle = fw.zoo_oracle("regular_tree", b=3)
ex = fw.Exhaustion(oracle)
hm = fw.harmonic_measure(oracle, ex, targets=[2, 3, 9], viewpoints=[4])
print("targets:", [int(k) for k in hm.target_keys])
print("law from vertex 4:", [round(float(p), 12) for p in hm.row(4)])
print(f"settled at truncation level {hm.levels_used[-1]}, "
      f"rows moving by {hm.achieved_tol:.2e}")

# Viewpoints inside the target set get a point mass, immediately.
hm0 = fw.harmonic_measure(oracle, ex, targets=[2, 3, 9], viewpoints=[9])
print("\nlaw from vertex 9 (a target):", [float(p) for p in hm0.row(9)])

# Harmonic extension: the voltage profile with prescribed boundary
# values and least Dirichlet energy.  Pin the root at 1 and a level-2
# vertex at 0, read the values on the rest of the level-2 ball.
extension = fw.min_energy_extension(oracle, ex, {1: 1.0, 5: 0.0},
                                    window=sorted(ex.vertices(2)))
print("\nminimum-energy voltages on the level-2 ball:")
for key in sorted(ex.vertices(2)):
    print(f"  vertex {key:3d}: {extension.value(key):.6f}")

# The optimality certificate on a finite graph: the minimizer's
# gradient is orthogonal to every flow supported off the boundary.
# Solve a pinned problem on a 4-cycle, then bump one value and watch
# the certificate fail.
import numpy as np

square = fw.WeightedGraph(4, [(0, 1, 1.0), (1, 2, 1.0),
                              (2, 3, 1.0), (3, 0, 2.0)])
values = fw.solve_free_dirichlet(square, {0: 0.0, 2: 1.0})
good = fw.cycle_orthogonality_check(square, [0, 2], values)
bumped = values + np.array([0.0, 0.1, 0.0, 0.0])
bad = fw.cycle_orthogonality_check(square, [0, 2], bumped)
print(f"\nminimizer passes the orthogonality check: {good.is_minimizer()} "
      f"(worst inner product {good.max_product:.2e})")
print(f"bumped profile passes: {bad.is_minimizer()} "
      f"(worst inner product {bad.max_product:.2e})")
print(f"energies: {fw.energy_report(square, values).energy:.6f} vs "
      f"{fw.energy_report(square, bumped).energy:.6f}")
