"""Regenerates the synthetic two-state income files.

Shifted lognormal incomes rounded to the nearest 100, sized and shaped to
resemble a pair of regional household income surveys: state A has a higher
mean and lighter right tail, state B a lower mean and heavier tail.
"""
import numpy as np


def shifted_lognormal(rng, n, mean, sd, skew):
    # lognormal skewness (w + 2) sqrt(w - 1) with w = exp(sigma^2)
    lo, hi = 1.0 + 1e-9, 10.0
    for _ in range(200):
        w = 0.5 * (lo + hi)
        if (w + 2) * np.sqrt(w - 1) < skew:
            lo = w
        else:
            hi = w
    sigma = np.sqrt(np.log(w))
    ln_mean = sd / np.sqrt(w - 1)
    mu = np.log(ln_mean) - 0.5 * sigma**2
    shift = mean - ln_mean
    draws = shift + rng.lognormal(mu, sigma, n)
    return np.maximum(np.round(draws / 100.0) * 100.0, 0.0)


rng = np.random.default_rng(20230301)
a = shifted_lognormal(rng, 4310, 26829.06, 15185.06, 2.75)
b = shifted_lognormal(rng, 7475, 15713.65, 12018.63, 4.69)
for name, values in [("synthetic_state_a.csv", a), ("synthetic_state_b.csv", b)]:
    with open(name, "w") as fh:
        fh.write("income\n")
        for v in values:
            fh.write(f"{int(v)}\n")
