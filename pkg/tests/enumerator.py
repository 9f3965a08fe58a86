"""Second, independently coded exhaustive search used to cross-check the
oracle. Deliberately different mechanics: recursive depth-first descent over
a step-major action matrix instead of flat index tuples, with its own argmax
bookkeeping. The grid point values themselves are an input (they are part of
the shared action-grid contract, not of the search being verified)."""

import numpy as np


def enumerate_best(env, points, horizon):
    """Best return over all |points|^(act_dim * horizon) grid sequences.

    Visits candidates in lexicographic order (step 0 component 0 most
    significant) and keeps the first maximizer, evaluating each through a
    fresh reset of the real environment.
    """
    dim = env.act_dim
    if horizon == 0:
        return 0.0, np.zeros((0, dim))
    combo = np.zeros((horizon, dim))
    found = {"value": None, "seq": None}

    def evaluate():
        env.reset()
        total = 0.0
        for s in range(horizon):
            total += env.step(combo[s]).reward
        if found["value"] is None or total > found["value"]:
            found["value"] = total
            found["seq"] = combo.copy()

    def descend(cell):
        if cell == horizon * dim:
            evaluate()
            return
        s, i = divmod(cell, dim)
        for p in points:
            combo[s, i] = p
            descend(cell + 1)

    descend(0)
    return found["value"], found["seq"]
