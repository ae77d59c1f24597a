"""Dense tensor contraction kernels shared by the game and metrics layers.

A joint tensor has one axis per agent (agent 0 is the slowest-varying axis in
the row-major flat layout). Contracting an axis with that agent's probability
vector takes the expectation over that agent's action. numpy's matmul/tensordot
reductions use pairwise-style summation, so results are partition-independent
to ~1e-12 relative.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def fold_all(tensor: np.ndarray, probs: Sequence[np.ndarray]) -> float:
    """Full expectation: contract every axis with the matching probability vector."""
    out = tensor
    for j in range(tensor.ndim - 1, -1, -1):
        out = out @ probs[j]
    return float(out)


def fold_except(tensor: np.ndarray, probs: Sequence[np.ndarray], keep: int) -> np.ndarray:
    """Contract every axis except `keep`; returns a vector indexed by agent `keep`'s action."""
    out = tensor
    for j in range(tensor.ndim - 1, keep, -1):
        out = out @ probs[j]
    for j in range(keep):
        out = np.tensordot(probs[j], out, axes=([0], [0]))
    return np.asarray(out, dtype=np.float64)


def fold_all_agents(tensor: np.ndarray, probs: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    """All leave-one-out contractions of a single shared tensor, plus the full expectation.

    Reuses prefix contractions (agents 0..i-1 folded) across agents, which costs
    about 2x one full sweep instead of N separate sweeps. Returns (marginals, mean)
    where marginals[i] is fold_except(tensor, probs, i).
    """
    num_agents = tensor.ndim
    prefixes = [tensor]
    for j in range(num_agents - 1):
        prefixes.append(np.tensordot(probs[j], prefixes[-1], axes=([0], [0])))
    marginals = np.empty((num_agents, tensor.shape[0]), dtype=np.float64)
    for i in range(num_agents):
        out = prefixes[i]
        for j in range(num_agents - 1, i, -1):
            out = out @ probs[j]
        marginals[i] = out
    mean = float(prefixes[-1] @ probs[num_agents - 1])
    return marginals, mean
