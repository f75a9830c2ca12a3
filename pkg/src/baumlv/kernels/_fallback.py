"""Pure numpy implementations of the model-checking kernels.

Edges are given in CSR form: `offsets` (length S+1) and `dst`, sorted by
source, with every state owning at least one edge.  `mapped[e, a]` is the
index of assignment `a` transported along edge `e`, or -1 when one of its
objects does not survive the step.  `X` has shape (A, S).
"""

import numpy as np


def _transport(offsets, dst, mapped, X, vanish):
    E = dst.shape[0]
    if E == 0:
        return np.zeros((0, X.shape[0]), dtype=bool)
    safe = np.where(mapped < 0, 0, mapped)
    vals = X[safe, dst[:, None]]
    return np.where(mapped < 0, bool(vanish), vals)


def pre_exists(offsets, dst, mapped, X, vanish):
    """Y[a, s] = OR over edges e of s of X[mapped[e, a], dst[e]] (vanish where mapped is -1)."""
    vals = _transport(offsets, dst, mapped, X.astype(bool), vanish)
    return np.logical_or.reduceat(vals, offsets[:-1], axis=0).T.copy()


def pre_forall(offsets, dst, mapped, X, vanish):
    vals = _transport(offsets, dst, mapped, X.astype(bool), vanish)
    return np.logical_and.reduceat(vals, offsets[:-1], axis=0).T.copy()


def reachable(offsets, dst, start):
    """Boolean mask of states reachable from `start` (itself included)."""
    n = offsets.shape[0] - 1
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [int(start)]
    while stack:
        s = stack.pop()
        for t in dst[offsets[s]:offsets[s + 1]]:
            if not seen[t]:
                seen[t] = True
                stack.append(int(t))
    return seen
