"""Hausdorff and Gromov-Hausdorff distances on small hand-made spaces."""
import numpy as np

from ghlab import FiniteMetricSpace, gh_exact, gh_oracle, hausdorff, validate
from ghlab.metric import MetricAxiomError, from_points

# four points on a line
X = validate(np.abs(np.subtract.outer([0.0, 1.0, 5.0, 10.0], [0.0, 1.0, 5.0, 10.0])))
print("d_H({0}, {0, 1}) =", hausdorff(X.subset([0]), X.subset([0, 1])))
print("d_H({0, 10}, {5}) =", hausdorff(X.subset([0, 3]), X.subset([2])))

# a unit square against an equilateral triangle
square = from_points([[0, 0], [1, 0], [1, 1], [0, 1]])
triangle = from_points([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]])
res = gh_exact(square, triangle)
print(f"d_GH(square, triangle) = {res.value:.6f} [{res.status}]")
print("certificate cells:", res.certificate.cells)
print("brute force agrees:", gh_oracle(square, triangle).value == res.value)

# a matrix that is not a metric is rejected with the broken axiom named
try:
    FiniteMetricSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
except MetricAxiomError as exc:
    print("rejected:", exc.violations[0])
