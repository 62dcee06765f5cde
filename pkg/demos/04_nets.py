"""Nets on an interval and a circle: sub-nets, the one-point distance, extensions."""
import math

import numpy as np

from ghlab.metric import random_space
from ghlab.relations import Correspondence, distortion
from ghlab.sampling import (NetSpec, delta1_convergence, dense_subnet_experiment,
                            extend_correspondence, extension_gap, generate_net)

table = dense_subnet_experiment(NetSpec("circle", 2 * math.pi, points=8), [8, 4, 2, 1])
print(table.to_csv())

table = delta1_convergence(NetSpec("circle", 2 * math.pi, points=2), [2, 4, 8, 16])
print("one point vs circle nets:", table.column("value"), "pi/2 =", math.pi / 2)

rng = np.random.default_rng(3)
coarse = generate_net(NetSpec("interval", 1.0, points=3))
fine = generate_net(NetSpec("interval", 1.0, points=9))
target = random_space(3, rng)
R = Correspondence(coarse, target, np.eye(3, dtype=bool) | (rng.random((3, 3)) < 0.3))
ext = extend_correspondence(R, fine)
delta = extension_gap(coarse, fine)
print(f"dis R' = {distortion(R):.4f}, dis extension = {distortion(ext):.4f}, "
      f"bound = {distortion(R) + 2 * delta:.4f}")
