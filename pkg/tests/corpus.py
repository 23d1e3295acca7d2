"""Random instance generators shared by the test modules."""

import numpy as np

from gcblotto import check_thresholds, validate_instance


def random_values(rng, n):
    raw = 0.2 + rng.random(n)
    return (raw / raw.sum()).tolist()


def satisfiable_instance(rng, n=None, k=None, n_range=(2, 8)):
    """A random instance whose D*k clears the threshold with some margin."""
    n = n or int(rng.integers(n_range[0], n_range[1] + 1))
    k = k or float(rng.uniform(20, 200))
    values = random_values(rng, n)
    probe = validate_instance(
        {"values": values, "resource_a": 2.0, "resource_b": 1.5, "k": k})
    required = check_thresholds(probe).required_Dk
    D = required / k * (1.05 + 2 * rng.random())
    rb = D / (n - 1) * (1.5 + 5 * rng.random())
    return validate_instance(
        {"values": values, "resource_a": rb + D, "resource_b": rb, "k": k})


def corpus(seed, count, **kwargs):
    rng = np.random.default_rng(seed)
    return [satisfiable_instance(rng, **kwargs) for _ in range(count)]
