"""Measurement layer: marginalized utilities, best responses, equilibrium gaps.

The marginalized utility r_i is agent i's expected payoff per own action with
all opponents integrated out under the current policy; every metric of a joint
policy is computed exactly from one such sweep. The inner maximizations in the
gaps have closed forms: a linear function over the simplex peaks at a vertex
(NE-gap), and the entropy-regularized linear objective peaks at the softmax of
r/tau with optimal value tau*logsumexp(r/tau) (QRE-gap).
"""

from __future__ import annotations

import numpy as np

from . import _contract
from .game import PotentialGame, _check_policy_dims, expected_potential, expected_utility
from .policy import JointPolicy, normalize_logs, row_entropies


def marginalized_utility(game: PotentialGame, agent: int, policy: JointPolicy) -> np.ndarray:
    """r_i(a) = E_{a_-i ~ pi_-i} u_i(a, a_-i), exact enumeration. Entries lie in [0, 1]."""
    _check_policy_dims(game, policy)
    return _contract.fold_except(game.utilities[agent], list(policy.probs), agent)


def marginal_sweep(game: PotentialGame, probs_rows) -> tuple[np.ndarray, float]:
    """All agents' marginalized utilities plus the expected potential, in one sweep.

    probs_rows: sequence of per-agent probability vectors. Returns (r, phi_mean)
    with r of shape (num_agents, num_actions). Identical-interest games share
    one tensor, so prefix contractions are reused across agents.
    """
    probs = list(probs_rows)
    if game.is_identical_interest:
        r, phi_mean = _contract.fold_all_agents(game.potential, probs)
        return r, phi_mean
    r = np.empty((game.num_agents, game.num_actions), dtype=np.float64)
    for i in range(game.num_agents):
        r[i] = _contract.fold_except(game.utilities[i], probs, i)
    phi_mean = _contract.fold_all(game.potential, probs)
    return r, phi_mean


def marginalized_utilities(game: PotentialGame, policy: JointPolicy) -> np.ndarray:
    """Marginalized utilities for every agent, shape (num_agents, num_actions)."""
    _check_policy_dims(game, policy)
    r, _ = marginal_sweep(game, policy.probs)
    return r


def best_response_logs(r: np.ndarray, tau: float) -> np.ndarray:
    """Log-probabilities of the regularized best response, softmax(r / tau). Requires tau > 0."""
    if tau <= 0:
        raise ValueError("best_response_logs requires tau > 0")
    return normalize_logs(np.asarray(r, dtype=np.float64) / tau)


def best_response(r: np.ndarray, tau: float) -> np.ndarray:
    """Best-response probability row for marginalized utility r.

    tau > 0: proportional to exp(r/tau). tau = 0: point mass on the argmax,
    ties broken toward the lowest action index.
    """
    r = np.asarray(r, dtype=np.float64)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0.0:
        out = np.zeros_like(r)
        out[int(np.argmax(r))] = 1.0  # np.argmax returns the first maximizer
        return out
    return np.exp(best_response_logs(r, tau))


def soft_maximum(r: np.ndarray, tau: float) -> float:
    """tau * logsumexp(r / tau): the regularized utility attained by the best response."""
    r = np.asarray(r, dtype=np.float64)
    m = float(np.max(r))
    return m + tau * float(np.log(np.sum(np.exp((r - m) / tau))))


def regularized_utility(game: PotentialGame, agent: int, policy: JointPolicy, tau: float) -> float:
    """u_i(pi) + tau * H(pi_i)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    h = row_entropies(policy.log_probs[agent : agent + 1])[0]
    return expected_utility(game, agent, policy) + tau * float(h)


def regularized_potential(game: PotentialGame, policy: JointPolicy, tau: float) -> float:
    """Phi(pi) + tau * sum_i H(pi_i)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return expected_potential(game, policy) + tau * float(np.sum(row_entropies(policy.log_probs)))


def ne_gap_terms(r: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Per-agent unregularized improvement: max_a r_i(a) - <r_i, pi_i>. Clamped at 0."""
    gains = np.max(r, axis=-1) - np.sum(r * probs, axis=-1)
    return np.maximum(gains, 0.0)


def qre_gap_terms(r: np.ndarray, log_probs: np.ndarray, tau: float) -> np.ndarray:
    """Per-agent regularized improvement: tau*LSE(r_i/tau) - <r_i, pi_i> - tau*H(pi_i).

    Equals tau * KL(pi_i || best_response(r_i, tau)). Clamped at 0 against
    rounding in the cancellation near a fixed point.
    """
    if tau <= 0:
        raise ValueError("qre_gap requires tau > 0")
    m = np.max(r, axis=-1, keepdims=True)
    soft_max = m[:, 0] + tau * np.log(np.sum(np.exp((r - m) / tau), axis=-1))
    probs = np.exp(log_probs)
    current = np.sum(r * probs, axis=-1) + tau * row_entropies(log_probs)
    return np.maximum(soft_max - current, 0.0)


def ne_gap(game: PotentialGame, policy: JointPolicy) -> float:
    """Largest utility any agent can gain by a unilateral deviation; 0 exactly at an NE."""
    _check_policy_dims(game, policy)
    r, _ = marginal_sweep(game, policy.probs)
    return float(np.max(ne_gap_terms(r, policy.probs)))


def qre_gap(game: PotentialGame, policy: JointPolicy, tau: float) -> float:
    """Largest regularized-utility gain available to any agent; 0 exactly at the QRE."""
    _check_policy_dims(game, policy)
    r, _ = marginal_sweep(game, policy.probs)
    return float(np.max(qre_gap_terms(r, policy.log_probs, tau)))


def best_response_log_distance(log_probs: np.ndarray, r: np.ndarray, tau: float) -> float:
    """max_i ||log pi_i - log best_response(r_i, tau)||_inf."""
    br_logs = normalize_logs(np.asarray(r, dtype=np.float64) / tau)
    return float(np.max(np.abs(log_probs - br_logs)))
