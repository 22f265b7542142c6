"""The permutation model behind the ranking losses.

Logits define a sequential choice process: pick a class with probability
proportional to exp(logit), remove it, repeat.  That assigns a probability
to every full ordering of the classes.  For distillation we fix a single
target ordering: the true label first, then the remaining classes sorted by
descending teacher logit.
"""

import math

import numpy as np

from pldlab import (
    make_rng,
    pl_enumerate,
    pl_log_likelihood,
    teacher_optimal_permutation,
)

# --- the target ordering ----------------------------------------------------
t = np.array([3.0, 1.0, 2.0, -0.5])
for label in (0, 1):
    print(f"teacher logits {t}, label {label} -> ranking",
          teacher_optimal_permutation(t, label))
print("the label always comes first, even when the teacher prefers another class\n")

# --- exact likelihood vs brute force ----------------------------------------
rng = make_rng(7)
s = rng.normal(size=4)
table = pl_enumerate(s)
print(f"enumerated all 4! = {len(table)} orderings; total probability =",
      sum(p for _, p in table))

best_order, best_p = max(table, key=lambda kv: kv[1])
print("most likely ordering", best_order, "matches descending argsort:",
      tuple(np.argsort(-s)) == best_order)

pi = teacher_optimal_permutation(s, 2)
exact = math.exp(pl_log_likelihood(s, pi))
looked_up = dict(table)[tuple(pi.tolist())]
print(f"likelihood of the target ordering: exact {exact:.12f}, "
      f"enumerated {looked_up:.12f}")

# --- translation invariance --------------------------------------------------
shift = 123.0
print("\nlog-likelihood shift-invariant:",
      abs(pl_log_likelihood(s + shift, pi) - pl_log_likelihood(s, pi)) < 1e-10)
