"""Learning dynamics: independent multiplicative policy updates and baselines.

Three methods over a fixed potential game, all starting from uniform policies
and updating every agent simultaneously from the same iteration's marginalized
utilities:

  npg       log pi_i <- (1 - eta*tau) log pi_i + eta r_i, renormalized.
            Each agent's update mixes its current policy with the softmax best
            response at temperature tau; requires tau > 0 and eta*tau <= 1.
  mwu       the tau = 0 limit (multiplicative weights / Hedge), tagged as its
            own method because it is the unregularized dynamic.
  pg_direct projected gradient ascent on the policy simplex with direct
            parameterization (the standard baseline).

A run records, per iteration: the regularized potential, both equilibrium
gaps, the Jeffrey divergence of the step, and running gap averages. With a
compliant learning rate the regularized potential must rise by at least
J(step)/(2 eta) every iteration; `run` enforces this when asked and raises
MonotonicityError with full context otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .game import PotentialGame
from .metrics import (
    best_response_log_distance,
    marginal_sweep,
    ne_gap_terms,
    qre_gap_terms,
)
from .policy import (
    PROB_FLOOR,
    JointPolicy,
    jeffrey_logs,
    logsumexp,
    project_simplex,
    row_entropies,
)

METHODS = ("npg", "mwu", "pg_direct")


class ParameterError(ValueError):
    """Run configuration outside the algorithm's admissible range."""


class MonotonicityError(RuntimeError):
    """Regularized potential failed to improve by J/(2 eta) at some step."""

    def __init__(self, t: int, phi_tau_t: float, phi_tau_next: float, jeffrey_step: float):
        self.t = t
        self.phi_tau_t = phi_tau_t
        self.phi_tau_next = phi_tau_next
        self.jeffrey_step = jeffrey_step
        super().__init__(
            f"improvement check failed at t={t}: "
            f"phi_tau[t]={phi_tau_t:.17g}, phi_tau[t+1]={phi_tau_next:.17g}, "
            f"jeffrey={jeffrey_step:.17g}"
        )


def default_learning_rate(num_agents: int, phi_max: float, tau: float) -> float:
    """Largest step size with a guaranteed per-step improvement: 1/(2(min(sqrt(N), 2 phi_max) + tau))."""
    if num_agents < 1 or phi_max <= 0 or tau < 0:
        raise ValueError("need num_agents >= 1, phi_max > 0, tau >= 0")
    return 1.0 / (2.0 * (min(math.sqrt(num_agents), 2.0 * phi_max) + tau))


def pg_direct_learning_rate(num_agents: int, num_actions: int) -> float:
    """Baseline step size for direct-parameterization gradient ascent: 1/(2 N |A|)."""
    return 1.0 / (2.0 * num_agents * num_actions)


def tau_for_epsilon_ne(epsilon: float, num_actions: int) -> float:
    """Regularization making an epsilon/2-accurate QRE an epsilon-accurate NE: eps/(2 log|A|)."""
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    if num_actions < 2:
        raise ParameterError("num_actions must be at least 2 (log|A| would vanish)")
    return epsilon / (2.0 * math.log(num_actions))


@dataclass(frozen=True)
class RunConfig:
    """One learning run: method, regularization, step size, and bookkeeping.

    eta may be the string "auto": npg/mwu resolve to default_learning_rate and
    pg_direct to pg_direct_learning_rate. log_every = 0 selects the default
    cadence (every iteration through 1000, every 10th after); a positive value
    logs every log_every-th iteration. Iterates 0 and T are always logged.
    """

    method: str
    tau: float = 0.0
    eta: float | str = "auto"
    max_iters: int = 1000
    seed: int = 0
    log_every: int = 0
    monotonicity_check: bool = True
    monotonicity_tol: float = 1e-9
    stop_qre_gap: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.method == "npg" and self.tau <= 0:
            raise ParameterError("npg requires tau > 0 (use method='mwu' for tau = 0)")
        if self.method in ("mwu", "pg_direct") and self.tau != 0:
            raise ParameterError(f"{self.method} is unregularized; tau must be 0")
        if self.max_iters < 0:
            raise ParameterError("max_iters must be nonnegative")
        if self.log_every < 0:
            raise ParameterError("log_every must be nonnegative")
        if isinstance(self.eta, str):
            if self.eta != "auto":
                raise ParameterError(f"eta must be a positive float or 'auto', got {self.eta!r}")
        elif self.eta <= 0:
            raise ParameterError("eta must be positive")

    def resolve_eta(self, game: PotentialGame) -> float:
        if self.eta == "auto":
            if self.method == "pg_direct":
                return pg_direct_learning_rate(game.num_agents, game.num_actions)
            return default_learning_rate(game.num_agents, game.phi_max, self.tau)
        return float(self.eta)


@dataclass
class IterateLog:
    """Logged trajectory of one run plus run-level diagnostics.

    Column arrays are aligned with `iters`. qre_gap columns are NaN for
    unregularized methods, jeffrey_step is NaN for pg_direct (its projection
    can zero out actions) and 0.0 on the final row. avg_* at row t is the mean
    over iterates 1..t; at t = 0 it repeats the initial gap. Sums and slacks
    are accumulated over every step, not just logged ones.
    """

    method: str
    tau: float
    eta: float
    seed: int
    num_agents: int
    num_actions: int
    phi_max: float
    game_kind: str
    game_seed: int
    num_steps: int
    iters: np.ndarray
    phi_tau: np.ndarray
    ne_gap: np.ndarray
    qre_gap: np.ndarray
    jeffrey_step: np.ndarray
    avg_ne_gap: np.ndarray
    avg_qre_gap: np.ndarray
    phi_tau_initial: float
    phi_tau_final: float
    sum_ne_gap: float
    sum_qre_gap: float
    min_ne_gap: float
    min_qre_gap: float
    sum_jeffrey: float
    initial_br_log_distance: float
    min_monotonicity_slack: float
    max_sandwich_slack: float
    stopped_early: bool
    final_policy: JointPolicy = field(repr=False)

    @property
    def avg_ne_gap_final(self) -> float:
        return self.sum_ne_gap / self.num_steps if self.num_steps else float("nan")

    @property
    def avg_qre_gap_final(self) -> float:
        return self.sum_qre_gap / self.num_steps if self.num_steps else float("nan")


def npg_update_logs(log_probs: np.ndarray, r: np.ndarray, eta: float, tau: float) -> np.ndarray:
    """Multiplicative update in log space; tau = 0 gives multiplicative weights."""
    z = (1.0 - eta * tau) * log_probs + eta * r
    return z - logsumexp(z, axis=-1, keepdims=True)


def npg_step(game: PotentialGame, policy: JointPolicy, eta: float, tau: float) -> JointPolicy:
    """One simultaneous update of every agent from the current marginalized utilities."""
    if eta <= 0:
        raise ParameterError("eta must be positive")
    if tau < 0:
        raise ParameterError("tau must be nonnegative")
    if eta * tau > 1.0:
        raise ParameterError(
            f"eta*tau = {eta * tau:g} > 1: the current policy's exponent would be negative"
        )
    r, _ = marginal_sweep(game, policy.probs)
    return JointPolicy(npg_update_logs(policy.log_probs, r, eta, tau))


def pg_direct_update_probs(probs: np.ndarray, r: np.ndarray, eta: float) -> np.ndarray:
    """Projected ascent step on the simplex with direct parameterization."""
    return project_simplex(probs + eta * r)


def pg_direct_step(game: PotentialGame, policy: JointPolicy, eta: float) -> JointPolicy:
    if eta <= 0:
        raise ParameterError("eta must be positive")
    r, _ = marginal_sweep(game, policy.probs)
    new_probs = pg_direct_update_probs(policy.probs, r, eta)
    return JointPolicy.from_probs(new_probs)


def run(game: PotentialGame, config: RunConfig) -> IterateLog:
    """Run the configured dynamic from uniform policies for max_iters steps.

    All metrics at an iterate are computed from a single marginalized-utility
    sweep. When monotonicity_check is set, the method is npg, and eta does not
    exceed default_learning_rate, every step must satisfy
    phi_tau[t+1] - phi_tau[t] >= J(step)/(2 eta) - monotonicity_tol.
    """
    eta = config.resolve_eta(game)
    tau = config.tau
    method = config.method
    if method in ("npg", "mwu") and eta * tau > 1.0:
        raise ParameterError(f"eta*tau = {eta * tau:g} > 1 is outside the update's range")

    mono_enabled = (
        config.monotonicity_check
        and method == "npg"
        and eta <= default_learning_rate(game.num_agents, game.phi_max, tau) * (1.0 + 1e-12)
    )
    log_sandwich = tau > 0.0
    log_a = math.log(game.num_actions)

    def should_log(t: int) -> bool:
        if config.log_every > 0:
            return t % config.log_every == 0
        return t <= 1000 or t % 10 == 0

    n = game.num_agents
    lp = np.full((n, game.num_actions), -math.log(game.num_actions))
    probs = np.exp(lp)
    r, phi_mean = marginal_sweep(game, probs)

    def phi_tau_of(phi_mean: float, lp: np.ndarray) -> float:
        return phi_mean + tau * float(np.sum(row_entropies(lp))) if tau > 0 else phi_mean

    def gaps_of(r: np.ndarray, lp: np.ndarray, probs: np.ndarray) -> tuple[float, float]:
        ne = float(np.max(ne_gap_terms(r, probs)))
        qre = float(np.max(qre_gap_terms(r, lp, tau))) if tau > 0 else float("nan")
        return ne, qre

    phi_tau = phi_tau_of(phi_mean, lp)
    ne, qre = gaps_of(r, lp, probs)
    d0 = best_response_log_distance(lp, r, tau) if tau > 0 else float("nan")
    phi_tau_initial = phi_tau

    track_jeffrey = method != "pg_direct"
    sum_ne = 0.0
    sum_qre = 0.0 if tau > 0 else float("nan")
    min_ne = ne
    min_qre = qre
    sum_j = 0.0 if track_jeffrey else float("nan")
    min_slack = math.inf if mono_enabled else float("nan")
    max_sandwich = (ne - qre - tau * log_a) if log_sandwich else float("nan")

    cols: list[tuple] = []  # (t, phi_tau, ne, qre, jeffrey, avg_ne, avg_qre)

    def averages(t: int) -> tuple[float, float]:
        if t == 0:
            return ne, qre
        return sum_ne / t, (sum_qre / t if tau > 0 else float("nan"))

    stopped_early = False
    steps_done = 0
    for t in range(config.max_iters):
        if method == "pg_direct":
            new_probs = pg_direct_update_probs(probs, r, eta)
            new_lp = np.log(np.maximum(new_probs, PROB_FLOOR))
            j = float("nan")
        else:
            new_lp = npg_update_logs(lp, r, eta, tau)
            new_probs = np.exp(new_lp)
            j = jeffrey_logs(new_lp, lp)

        if should_log(t):
            avg_ne, avg_qre = averages(t)
            cols.append((t, phi_tau, ne, qre, j, avg_ne, avg_qre))

        lp, probs = new_lp, new_probs
        r, phi_mean = marginal_sweep(game, probs)
        phi_tau_next = phi_tau_of(phi_mean, lp)
        if mono_enabled:
            slack = phi_tau_next - phi_tau - j / (2.0 * eta)
            min_slack = min(min_slack, slack)
            if slack < -config.monotonicity_tol:
                raise MonotonicityError(t, phi_tau, phi_tau_next, j)
        phi_tau = phi_tau_next
        ne, qre = gaps_of(r, lp, probs)
        sum_ne += ne
        min_ne = min(min_ne, ne)
        if tau > 0:
            sum_qre += qre
            min_qre = min(min_qre, qre)
            max_sandwich = max(max_sandwich, ne - qre - tau * log_a)
        if track_jeffrey:
            sum_j += j
        steps_done = t + 1
        if config.stop_qre_gap is not None and tau > 0 and qre <= config.stop_qre_gap:
            stopped_early = True
            break

    avg_ne, avg_qre = averages(steps_done)
    cols.append((steps_done, phi_tau, ne, qre, 0.0 if track_jeffrey else float("nan"),
                 avg_ne, avg_qre))

    arr = np.array(cols, dtype=np.float64)
    return IterateLog(
        method=method,
        tau=tau,
        eta=eta,
        seed=config.seed,
        num_agents=game.num_agents,
        num_actions=game.num_actions,
        phi_max=game.phi_max,
        game_kind=game.kind,
        game_seed=game.seed,
        num_steps=steps_done,
        iters=arr[:, 0].astype(np.int64),
        phi_tau=arr[:, 1],
        ne_gap=arr[:, 2],
        qre_gap=arr[:, 3],
        jeffrey_step=arr[:, 4],
        avg_ne_gap=arr[:, 5],
        avg_qre_gap=arr[:, 6],
        phi_tau_initial=phi_tau_initial,
        phi_tau_final=phi_tau,
        sum_ne_gap=sum_ne,
        sum_qre_gap=sum_qre,
        min_ne_gap=min_ne,
        min_qre_gap=min_qre,
        sum_jeffrey=sum_j,
        initial_br_log_distance=d0,
        min_monotonicity_slack=min_slack if mono_enabled else float("nan"),
        max_sandwich_slack=max_sandwich,
        stopped_early=stopped_early,
        final_policy=JointPolicy(lp.copy()),
    )


def theorem_average_gap_sides(log: IterateLog) -> tuple[float, float] | None:
    """Measured average QRE-gap over iterates 1..T and its guaranteed upper bound.

    Bound: (2/(eta tau T)) * (tau * D0 + sqrt(2 eta T (phi_tau[T] - phi_tau[0]))),
    every quantity taken from the run itself. None when the bound does not
    apply (unregularized method or zero steps).
    """
    if log.method != "npg" or log.tau <= 0 or log.num_steps == 0:
        return None
    t = log.num_steps
    lhs = log.sum_qre_gap / t
    gain = max(log.phi_tau_final - log.phi_tau_initial, 0.0)
    rhs = (2.0 / (log.eta * log.tau * t)) * (
        log.tau * log.initial_br_log_distance + math.sqrt(2.0 * log.eta * t * gain)
    )
    return lhs, rhs


def initial_distance_bound_sides(log: IterateLog) -> tuple[float, float] | None:
    """Initial log-distance to the best response vs its uniform-start bound 2/tau."""
    if log.tau <= 0:
        return None
    return log.initial_br_log_distance, 2.0 / log.tau


def jeffrey_sum_sides(log: IterateLog) -> tuple[float, float] | None:
    """Total policy movement sum_t J(step_t) vs its bound 2 eta (phi_tau[T] - phi_tau[0])."""
    if log.method == "pg_direct" or log.num_steps == 0:
        return None
    return log.sum_jeffrey, 2.0 * log.eta * (log.phi_tau_final - log.phi_tau_initial)


def predicted_iterations(log: IterateLog, epsilon: float) -> float:
    """Iteration-count scale min(sqrt(N), phi_max) * phi_max / (tau^2 eps^2) for reaching eps."""
    return (
        min(math.sqrt(log.num_agents), log.phi_max)
        * log.phi_max
        / (log.tau**2 * epsilon**2)
    )
