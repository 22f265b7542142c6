"""Tour of the numerical primitives.

Everything downstream (ranking likelihoods, loss kernels, training) leans
on four things shown here: max-subtracted softmax, log-sum-exp, a running
log-sum-exp, and deterministic sorting plus seeded counter-based RNG.
"""

import numpy as np

from pldlab import argsort_stable, log_cumsum_exp, log_sum_exp, make_rng, softmax

# --- softmax is safe at any logit scale -----------------------------------
print("softmax([0, 0])              =", softmax([0.0, 0.0]))
print("softmax([ln 3, 0])           =", softmax([np.log(3.0), 0.0]))
print("softmax([1000, 0]) no overflow:", softmax([1000.0, 0.0]))
print("temperature flattens: tau=4  =", softmax([2.0, 0.0, -2.0], temperature=4.0))

# translation invariance: shifting every logit changes nothing
v = np.array([0.3, -1.2, 2.5])
print("max |softmax(v+100) - softmax(v)| =", np.abs(softmax(v + 100.0) - softmax(v)).max())

# --- log-sum-exp and its running version ----------------------------------
print("\nlog_sum_exp([1000, 1000]) =", log_sum_exp([1000.0, 1000.0]), "(= 1000 + ln 2)")
x = np.array([0.0, 0.0, 1000.0, -5.0])
print("log_cumsum_exp(", x, ") =", log_cumsum_exp(x))
print("  note the prefix before the huge entry is still exact (ln 2 =", np.log(2.0), ")")

# --- deterministic sorting --------------------------------------------------
t = np.array([1.0, 1.0, 0.0, 2.0])
print("\ndescending argsort of", t, "=", argsort_stable(t, descending=True))
print("  ties keep the lower class index first, so rankings are reproducible")

# --- seeded counter-based RNG ----------------------------------------------
a = make_rng(42).random(3)
b = make_rng(42).random(3)
print("\ntwo generators with seed 42 agree bitwise:", np.array_equal(a, b))
print("first draws:", a)
