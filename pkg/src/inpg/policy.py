"""Product-form joint policies stored in log space, plus simplex geometry.

A joint policy is one probability vector per agent over the shared action set,
kept as log-probabilities. Multiplicative policy updates become affine
recursions in log space and cannot underflow to exact zeros, which keeps
entropies and divergences well defined throughout long runs. Probabilities are
floored (at PROB_FLOOR) only when serialized for display.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

# Floor applied to probabilities at serialization/display only; dynamics never clip.
PROB_FLOOR = 1e-300

_NORMALIZATION_TOL = 1e-12


def logsumexp(x: np.ndarray, axis: int = -1, keepdims: bool = False) -> np.ndarray:
    """Max-shifted log(sum(exp(x))) along an axis."""
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    if not keepdims:
        out = np.squeeze(out, axis=axis)
    return out


def normalize_logs(logits: np.ndarray) -> np.ndarray:
    """Shift rows of logits so each row is a normalized log-probability vector."""
    return logits - logsumexp(logits, axis=-1, keepdims=True)


@dataclass(frozen=True)
class JointPolicy:
    """Product policy: log_probs has shape (num_agents, num_actions), rows normalized."""

    log_probs: np.ndarray

    def __post_init__(self):
        lp = self.log_probs
        if lp.ndim != 2:
            raise ValueError(f"log_probs must be 2-D (agents x actions), got shape {lp.shape}")
        if not np.all(np.isfinite(lp)):
            raise ValueError("log_probs must be finite (policies are strictly positive)")
        norms = logsumexp(lp, axis=-1)
        if np.max(np.abs(norms)) > _NORMALIZATION_TOL:
            raise ValueError(f"rows not normalized: max |logsumexp| = {np.max(np.abs(norms)):g}")
        lp.setflags(write=False)

    @property
    def num_agents(self) -> int:
        return self.log_probs.shape[0]

    @property
    def num_actions(self) -> int:
        return self.log_probs.shape[1]

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    @classmethod
    def from_logits(cls, logits: np.ndarray) -> "JointPolicy":
        return cls(normalize_logs(np.asarray(logits, dtype=np.float64)))

    @classmethod
    def from_probs(cls, rows: np.ndarray) -> "JointPolicy":
        """Build from probability rows; entries are floored at PROB_FLOOR before the log."""
        p = np.maximum(np.asarray(rows, dtype=np.float64), PROB_FLOOR)
        return cls(normalize_logs(np.log(p)))


@dataclass(frozen=True)
class SoftmaxParams:
    """Unconstrained logits, one row per agent."""

    theta: np.ndarray

    def __post_init__(self):
        if self.theta.ndim != 2:
            raise ValueError(f"theta must be 2-D (agents x actions), got shape {self.theta.shape}")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")


def uniform_policy(num_agents: int, num_actions: int) -> JointPolicy:
    if num_agents < 1 or num_actions < 1:
        raise ValueError("num_agents and num_actions must be positive")
    lp = np.full((num_agents, num_actions), -np.log(num_actions), dtype=np.float64)
    return JointPolicy(lp)


def softmax(params: SoftmaxParams) -> JointPolicy:
    """pi_i(a) = exp(theta_i(a)) / sum_a' exp(theta_i(a')), via max-shifted normalization."""
    return JointPolicy.from_logits(params.theta)


def entropy(row: np.ndarray) -> float:
    """Shannon entropy -sum p log p of a probability row; 0 log 0 = 0."""
    p = np.asarray(row, dtype=np.float64)
    terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return float(-np.sum(terms))


def entropy_logs(log_row: np.ndarray) -> float:
    """Entropy straight from log-probabilities (accurate near the simplex boundary)."""
    return float(-np.sum(np.exp(log_row) * log_row))


def row_entropies(log_probs: np.ndarray) -> np.ndarray:
    """Per-agent entropies of a (num_agents, num_actions) log-probability array."""
    return -np.sum(np.exp(log_probs) * log_probs, axis=-1)


def kl(p_row: np.ndarray, q_row: np.ndarray) -> float:
    """KL(p || q) for probability rows; q must be strictly positive where p > 0."""
    p = np.asarray(p_row, dtype=np.float64)
    q = np.asarray(q_row, dtype=np.float64)
    mask = p > 0.0
    val = float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))
    return max(val, 0.0)


def kl_logs(lp: np.ndarray, lq: np.ndarray) -> float:
    """KL(p || q) from log-probability rows, no re-exponentiation round trip."""
    return max(float(np.sum(np.exp(lp) * (lp - lq))), 0.0)


def jeffrey_logs(lp: np.ndarray, lq: np.ndarray) -> float:
    """Symmetrized KL summed over all rows of two log-probability arrays.

    Computed elementwise as (p - q)(log p - log q) >= 0, so rounding can never
    make the result negative.
    """
    return float(np.sum((np.exp(lp) - np.exp(lq)) * (lp - lq)))


def jeffrey(p: JointPolicy, q: JointPolicy) -> float:
    """Jeffrey divergence of two product policies: sum_i [KL(p_i||q_i) + KL(q_i||p_i)]."""
    if p.log_probs.shape != q.log_probs.shape:
        raise ValueError("policies have different shapes")
    return jeffrey_logs(p.log_probs, q.log_probs)


def total_variation(p_row: np.ndarray, q_row: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p_row) - np.asarray(q_row))))


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of v onto the probability simplex.

    Sort-based algorithm: with u = sorted(v) descending and c_k = (sum_{j<=k} u_j - 1)/k,
    the threshold is c_rho for the largest rho with u_rho > c_rho, and the projection
    is max(v - c_rho, 0). Exact up to floating point; output rows can contain zeros.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    n = v.shape[1]
    u = np.sort(v, axis=1)[:, ::-1]
    cssv = (np.cumsum(u, axis=1) - 1.0) / np.arange(1, n + 1)
    rho = np.count_nonzero(u > cssv, axis=1)
    theta = cssv[np.arange(v.shape[0]), rho - 1]
    return np.maximum(v - theta[:, None], 0.0)


def policy_to_csv(policy: JointPolicy, path_or_file) -> None:
    """One row per agent, probabilities floored at PROB_FLOOR, 17 significant digits."""
    probs = np.maximum(policy.probs, PROB_FLOOR)
    text = "\n".join(",".join(format(p, ".17g") for p in row) for row in probs) + "\n"
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w") as f:
            f.write(text)
    else:
        path_or_file.write(text)


def policy_from_csv(path_or_file) -> JointPolicy:
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file) as f:
            text = f.read()
    else:
        text = path_or_file.read()
    rows = [
        [float(tok) for tok in line.split(",")]
        for line in io.StringIO(text).read().splitlines()
        if line.strip()
    ]
    return JointPolicy.from_probs(np.array(rows, dtype=np.float64))
