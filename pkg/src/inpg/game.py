"""Finite potential games as dense joint-action tensors.

A game holds a potential tensor and one utility tensor per agent, all of shape
(num_actions,) * num_agents with agent 0 as the slowest-varying (row-major)
axis. Unilateral deviations must change every agent's utility exactly as they
change the potential; `check_potential_property` scans for violations.

Generators draw the potential i.i.d. Beta(1/2, 1/2) through the seeded
generator in `rng`, so identical (num_agents, num_actions, seed) inputs yield
bitwise-identical tensors.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _contract
from .rng import beta_half_half, uniform_array

DEFAULT_DENSE_CAP = 2**24

_MAGIC = b"INPGGAME"
_FORMAT_VERSION = 1


class GameSizeError(ValueError):
    """Joint action space exceeds the dense-tensor capacity."""


@dataclass(frozen=True)
class PotentialGame:
    """Dense potential game.

    potential: shape (num_actions,)*num_agents, entries in [0, phi_max].
    utilities: one tensor per agent, same shape, entries in [0, 1].
    kind: generator tag ("identical", "general", or "custom").
    """

    num_agents: int
    num_actions: int
    potential: np.ndarray
    utilities: tuple[np.ndarray, ...]
    phi_max: float
    seed: int = 0
    kind: str = "custom"

    def __post_init__(self):
        shape = (self.num_actions,) * self.num_agents
        if self.potential.shape != shape:
            raise ValueError(f"potential shape {self.potential.shape} != {shape}")
        if len(self.utilities) != self.num_agents:
            raise ValueError(f"need {self.num_agents} utility tensors, got {len(self.utilities)}")
        for u in self.utilities:
            if u.shape != shape:
                raise ValueError(f"utility shape {u.shape} != {shape}")
        self.potential.setflags(write=False)
        for u in self.utilities:
            u.setflags(write=False)

    @property
    def joint_shape(self) -> tuple[int, ...]:
        return (self.num_actions,) * self.num_agents

    @property
    def num_entries(self) -> int:
        return self.num_actions**self.num_agents

    @property
    def is_identical_interest(self) -> bool:
        return all(u is self.potential for u in self.utilities)


@dataclass(frozen=True)
class PotentialViolation:
    """First violating unilateral deviation found by check_potential_property."""

    agent: int
    action: int
    other_action: int
    opponents: tuple[int, ...]  # opponent actions in agent order, agent's own slot removed
    residual: float


def require_capacity(num_agents: int, num_actions: int, max_entries: int = DEFAULT_DENSE_CAP) -> int:
    if num_agents < 1 or num_actions < 1:
        raise ValueError("num_agents and num_actions must be positive")
    entries = num_actions**num_agents
    if entries > max_entries:
        raise GameSizeError(
            f"joint action space has {num_actions}^{num_agents} = {entries} entries, "
            f"exceeding the dense cap of {max_entries}"
        )
    return entries


def make_identical_interest(
    num_agents: int, num_actions: int, seed: int, max_entries: int = DEFAULT_DENSE_CAP
) -> PotentialGame:
    """Identical-interest game: all agents share the Beta(1/2,1/2) potential; phi_max = 1."""
    entries = require_capacity(num_agents, num_actions, max_entries)
    shape = (num_actions,) * num_agents
    phi = beta_half_half(uniform_array(seed, entries)).reshape(shape)
    return PotentialGame(
        num_agents=num_agents,
        num_actions=num_actions,
        potential=phi,
        utilities=(phi,) * num_agents,
        phi_max=1.0,
        seed=seed,
        kind="identical",
    )


def make_general_potential(
    num_agents: int, num_actions: int, seed: int, max_entries: int = DEFAULT_DENSE_CAP
) -> PotentialGame:
    """Potential game with non-identical utilities.

    Raw potential entries are Beta(1/2,1/2); each agent adds a dummy term
    c_i over opponent profiles, Uniform[0, 1/2]. Both are divided by 3/2 so
    utilities u_i = (raw_phi + c_i)/1.5 stay in [0, 1]; the stored potential
    is raw_phi/1.5 (the shared scaling preserves the deviation identity) and
    phi_max = 2/3. The seed stream is consumed as: entries for the potential,
    then entries/num_actions dummies per agent in agent order.
    """
    entries = require_capacity(num_agents, num_actions, max_entries)
    shape = (num_actions,) * num_agents
    opp_shape = (num_actions,) * (num_agents - 1)
    opp_entries = num_actions ** (num_agents - 1)

    raw_phi = beta_half_half(uniform_array(seed, entries)).reshape(shape)
    offset = entries
    utilities = []
    for i in range(num_agents):
        c_i = 0.5 * uniform_array(seed, opp_entries, offset=offset).reshape(opp_shape)
        offset += opp_entries
        utilities.append((raw_phi + np.expand_dims(c_i, axis=i)) / 1.5)
    return PotentialGame(
        num_agents=num_agents,
        num_actions=num_actions,
        potential=raw_phi / 1.5,
        utilities=tuple(utilities),
        phi_max=2.0 / 3.0,
        seed=seed,
        kind="general",
    )


def check_potential_property(
    game: PotentialGame, tol: float = 1e-12
) -> tuple[bool, PotentialViolation | None]:
    """Check u_i(a_i, a_-i) - u_i(a_i', a_-i) == Phi(a_i, a_-i) - Phi(a_i', a_-i) for all tuples.

    Equivalent to u_i - Phi being constant along agent i's axis, so the scan
    costs O(N * |A|^N). Returns (True, None) or (False, first violation found).
    """
    for i in range(game.num_agents):
        diff = game.utilities[i] - game.potential
        spread = diff.max(axis=i) - diff.min(axis=i)
        worst = float(spread.max()) if spread.size else 0.0
        if worst > tol:
            opp_flat = int(np.argmax(spread))
            opponents = np.unravel_index(opp_flat, spread.shape) if spread.ndim else ()
            line = diff[_slice_at(i, opponents)]
            return False, PotentialViolation(
                agent=i,
                action=int(np.argmax(line)),
                other_action=int(np.argmin(line)),
                opponents=tuple(int(a) for a in opponents),
                residual=worst,
            )
    return True, None


def _slice_at(agent: int, opponents: tuple) -> tuple:
    """Index tuple selecting agent's own-action line at a fixed opponent profile."""
    idx = list(opponents)
    idx.insert(agent, slice(None))
    return tuple(idx)


def _check_policy_dims(game: PotentialGame, policy) -> None:
    if policy.num_agents != game.num_agents or policy.num_actions != game.num_actions:
        raise ValueError(
            f"policy dims ({policy.num_agents}, {policy.num_actions}) do not match "
            f"game dims ({game.num_agents}, {game.num_actions})"
        )


def expected_potential(game: PotentialGame, policy) -> float:
    """Phi(pi) = sum_a Phi(a) * prod_i pi_i(a_i)."""
    _check_policy_dims(game, policy)
    return _contract.fold_all(game.potential, list(policy.probs))


def expected_utility(game: PotentialGame, agent: int, policy) -> float:
    """u_i(pi) = sum_a u_i(a) * prod_j pi_j(a_j)."""
    _check_policy_dims(game, policy)
    return _contract.fold_all(game.utilities[agent], list(policy.probs))


def save_game(game: PotentialGame, path) -> None:
    """Write the binary game format (documented in README; stable across versions).

    Layout, all little-endian:
      8s    magic "INPGGAME"
      u32   format version (1)
      u32   num_agents
      u32   num_actions
      f64   phi_max
      u64   seed
      u32   tag length, then tag bytes (utf-8 generator tag)
      f64[] potential then each utility tensor, row-major
    """
    tag = game.kind.encode("utf-8")
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IIIdQI", _FORMAT_VERSION, game.num_agents, game.num_actions,
                            game.phi_max, game.seed, len(tag)))
        f.write(tag)
        f.write(np.ascontiguousarray(game.potential, dtype="<f8").tobytes())
        for u in game.utilities:
            f.write(np.ascontiguousarray(u, dtype="<f8").tobytes())


def load_game(path) -> PotentialGame:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a game file (bad magic {magic!r})")
        version, num_agents, num_actions, phi_max, seed, tag_len = struct.unpack(
            "<IIIdQI", f.read(32)
        )
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        kind = f.read(tag_len).decode("utf-8")
        shape = (num_actions,) * num_agents
        entries = num_actions**num_agents
        payload = f.read()
    expected = 8 * entries * (1 + num_agents)
    if len(payload) != expected:
        raise ValueError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    phi = flat[:entries].reshape(shape)
    if kind == "identical":
        utilities = (phi,) * num_agents
    else:
        utilities = tuple(
            flat[entries * (1 + i) : entries * (2 + i)].reshape(shape).copy()
            for i in range(num_agents)
        )
    return PotentialGame(
        num_agents=num_agents,
        num_actions=num_actions,
        potential=phi,
        utilities=utilities,
        phi_max=phi_max,
        seed=seed,
        kind=kind,
    )


def summarize_game(game: PotentialGame) -> str:
    """Human-readable summary written next to generated game files."""
    phi = game.potential
    lines = [
        f"kind: {game.kind}",
        f"num_agents: {game.num_agents}",
        f"num_actions: {game.num_actions}",
        f"joint_entries: {game.num_entries}",
        f"seed: {game.seed}",
        f"phi_max (declared bound): {game.phi_max:.17g}",
        f"phi empirical min: {phi.min():.17g}",
        f"phi empirical max: {phi.max():.17g}",
        f"phi empirical mean: {phi.mean():.17g}",
    ]
    return "\n".join(lines) + "\n"
