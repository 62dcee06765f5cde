"""The curve t -> tX runs from the one-point space to X at constant speed."""
import numpy as np

from ghlab import diameter, geodesic_probe
from ghlab.metric import random_space

X = random_space(5, np.random.default_rng(7))
table = geodesic_probe(X, [0, 0.25, 0.5, 0.75, 1])
print(f"diam X = {diameter(X):.4f}")
print(" s     t     d_GH(sX, tX)  (t-s) diam/2")
for s, t, value, expected in table.rows:
    print(f"{s:4.2f}  {t:4.2f}  {value:12.6f}  {expected:12.6f}")
print("all rows match:", table.passed)
