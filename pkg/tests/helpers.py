"""Shared oracles and generators for the test-suite."""
import math
from collections import Counter

import numpy as np


def random_simplex(rng, d, min_quality=0.05):
    """Random positively oriented d-simplex in the unit box with bounded aspect ratio."""
    while True:
        v = rng.random((d + 1, d))
        edges = v[1:] - v[0]
        vol = np.linalg.det(edges) / math.factorial(d)
        longest = max(np.linalg.norm(v[a] - v[b]) for a in range(d + 1) for b in range(a))
        if abs(vol) > min_quality * longest**d:
            if vol < 0:
                v[[-2, -1]] = v[[-1, -2]]
            return v


def brute_force_boundary_faces(elems, dim):
    """Faces (as sorted tuples) that occur in exactly one element."""
    count = Counter()
    for e in np.asarray(elems).tolist():
        for skip in range(dim + 1):
            count[tuple(sorted(v for k, v in enumerate(e) if k != skip))] += 1
    return {f for f, c in count.items() if c == 1}


def barycentric_gradients_oracle(vertices):
    """Gradients of lambda_i by solving [x 1] c = e_i; columns are the gradients."""
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    M = np.hstack([v, np.ones((d + 1, 1))])
    coef = np.linalg.inv(M)  # column i: coefficients of lambda_i
    return coef[:d, :]
