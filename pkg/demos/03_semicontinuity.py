"""Semicontinuity of set-valued maps between finite topological spaces."""
import numpy as np

from ghlab.topology import (SetValuedMap, classify_correspondence, discrete_topology,
                            full_preimage, is_lower_semicontinuous, is_upper_semicontinuous,
                            sierpinski, small_preimage)

S = sierpinski()  # points a=0, b=1; opens {}, {a}, {a, b}
D = discrete_topology(2)

f = SetValuedMap(S, S, [{1}, {0, 1}])
print("f:", f, " full preimage of {a}:", sorted(full_preimage(f, {0})),
      " small preimage of {b}:", sorted(small_preimage(f, {1})))

g = SetValuedMap(S, D, [{0, 1}, {0}])
lower, upper = is_lower_semicontinuous(g), is_upper_semicontinuous(g)
print("g:", g, " lower:", lower.holds, " upper:", upper.holds)
print("  why not upper:", upper.witness)

swap = np.array([[0, 1], [1, 0]], dtype=bool)
print("swap on Sierpinski space:", sorted(classify_correspondence(swap, S, S)))
print("swap on discrete space:  ", sorted(classify_correspondence(swap, D, D)))
