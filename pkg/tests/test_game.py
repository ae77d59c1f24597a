import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inpg.game import (
    DEFAULT_DENSE_CAP,
    GameSizeError,
    PotentialGame,
    check_potential_property,
    expected_potential,
    expected_utility,
    load_game,
    make_general_potential,
    make_identical_interest,
    save_game,
    summarize_game,
)
from inpg.metrics import marginalized_utility
from inpg.policy import JointPolicy, uniform_policy

from conftest import random_policy


def exhaustive_potential_scan(game, tol=1e-12):
    """Independent check of the unilateral-deviation identity, tuple by tuple."""
    a_range = range(game.num_actions)
    for i in range(game.num_agents):
        for opp in itertools.product(a_range, repeat=game.num_agents - 1):
            for a, b in itertools.combinations(a_range, 2):
                idx_a = list(opp)
                idx_a.insert(i, a)
                idx_b = list(opp)
                idx_b.insert(i, b)
                du = game.utilities[i][tuple(idx_a)] - game.utilities[i][tuple(idx_b)]
                dphi = game.potential[tuple(idx_a)] - game.potential[tuple(idx_b)]
                if abs(du - dphi) > tol:
                    return False
    return True


class TestIdenticalInterest:
    def test_section5_size_and_range(self):
        game = make_identical_interest(4, 20, seed=7)
        assert game.num_entries == 160_000
        assert game.potential.shape == (20, 20, 20, 20)
        assert 0.0 < game.potential.min() and game.potential.max() < 1.0
        assert game.phi_max == 1.0
        assert all(u is game.potential for u in game.utilities)

    def test_degenerate_single_cell(self):
        game = make_identical_interest(1, 1, seed=0)
        assert game.potential.shape == (1,)
        assert 0.0 < float(game.potential[0]) < 1.0
        assert game.utilities[0] is game.potential

    def test_seeded_determinism(self):
        a = make_identical_interest(2, 3, seed=42)
        b = make_identical_interest(2, 3, seed=42)
        assert np.array_equal(a.potential, b.potential)
        assert not np.array_equal(a.potential, make_identical_interest(2, 3, seed=43).potential)

    def test_potential_property_trivial(self):
        game = make_identical_interest(2, 4, seed=3)
        ok, violation = check_potential_property(game)
        assert ok and violation is None


class TestGeneralPotential:
    def test_property_by_exhaustive_scan(self):
        game = make_general_potential(2, 2, seed=1)
        assert exhaustive_potential_scan(game)
        ok, _ = check_potential_property(game, tol=1e-12)
        assert ok

    def test_single_agent_dummy_is_constant(self):
        game = make_general_potential(1, 5, seed=11)
        shift = game.utilities[0] - game.potential
        assert np.ptp(shift) < 1e-15  # one dummy entry when there are no opponents
        assert 0.0 < shift[0] < 1.0 / 3.0  # c_1/(3/2) with c_1 in [0, 1/2]

    def test_utilities_differ_between_agents(self):
        game = make_general_potential(3, 2, seed=5)
        assert not np.array_equal(game.utilities[0], game.utilities[1])
        assert not np.array_equal(game.utilities[1], game.utilities[2])

    def test_ranges_and_phi_max(self):
        game = make_general_potential(3, 3, seed=8)
        assert game.phi_max == pytest.approx(2.0 / 3.0)
        assert 0.0 <= game.potential.min() and game.potential.max() <= game.phi_max
        for u in game.utilities:
            assert 0.0 <= u.min() and u.max() <= 1.0

    @settings(max_examples=25, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=3),
        a=st.integers(min_value=1, max_value=4),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    def test_every_generated_game_is_potential(self, n, a, seed):
        for maker in (make_identical_interest, make_general_potential):
            ok, violation = check_potential_property(maker(n, a, seed), tol=1e-12)
            assert ok, violation


class TestPotentialCheck:
    def test_detects_perturbation(self):
        base = make_identical_interest(2, 3, seed=9)
        utilities = [u.copy() for u in base.utilities]
        utilities[1][2, 1] += 1e-3
        broken = PotentialGame(
            num_agents=2, num_actions=3, potential=base.potential.copy(),
            utilities=tuple(utilities), phi_max=1.0,
        )
        ok, violation = check_potential_property(broken, tol=1e-12)
        assert not ok
        assert violation.agent == 1
        assert violation.residual == pytest.approx(1e-3, rel=1e-9)
        assert violation.opponents == (2,)
        assert {violation.action, violation.other_action} >= {1}

    def test_residual_below_tol_passes(self):
        base = make_identical_interest(2, 3, seed=9)
        utilities = [u.copy() for u in base.utilities]
        utilities[0][0, 0] += 1e-14
        nudged = PotentialGame(
            num_agents=2, num_actions=3, potential=base.potential.copy(),
            utilities=tuple(utilities), phi_max=1.0,
        )
        ok, _ = check_potential_property(nudged, tol=1e-12)
        assert ok


class TestCapacity:
    def test_cap_error_names_sizes(self):
        with pytest.raises(GameSizeError) as err:
            make_identical_interest(9, 7, seed=0)
        assert str(7**9) in str(err.value)
        assert str(DEFAULT_DENSE_CAP) in str(err.value)

    def test_cap_override(self):
        with pytest.raises(GameSizeError):
            make_identical_interest(2, 3, seed=0, max_entries=8)
        game = make_identical_interest(2, 3, seed=0, max_entries=9)
        assert game.num_entries == 9

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            make_identical_interest(0, 3, seed=0)


class TestExpectedValues:
    def test_point_mass_policies(self):
        game = make_identical_interest(3, 4, seed=2)
        joint = (1, 3, 0)
        lp = np.full((3, 4), -1e4)
        for i, a in enumerate(joint):
            lp[i, a] = 0.0
        pol = JointPolicy(lp)
        assert expected_potential(game, pol) == pytest.approx(game.potential[joint], abs=1e-15)
        assert expected_utility(game, 2, pol) == pytest.approx(game.utilities[2][joint], abs=1e-15)

    def test_uniform_is_mean(self):
        game = make_general_potential(2, 5, seed=4)
        pol = uniform_policy(2, 5)
        assert expected_potential(game, pol) == pytest.approx(game.potential.mean(), abs=1e-13)

    def test_two_by_two_hand_sum(self, rng):
        game = make_identical_interest(2, 2, seed=6)
        pol = random_policy(rng, 2, 2)
        p, q = pol.probs
        phi = game.potential
        hand = (
            p[0] * q[0] * phi[0, 0] + p[0] * q[1] * phi[0, 1]
            + p[1] * q[0] * phi[1, 0] + p[1] * q[1] * phi[1, 1]
        )
        assert expected_potential(game, pol) == pytest.approx(hand, abs=1e-14)

    def test_identical_interest_utility_equals_potential(self, rng):
        game = make_identical_interest(3, 3, seed=1)
        pol = random_policy(rng, 3, 3)
        phi = expected_potential(game, pol)
        for i in range(3):
            assert expected_utility(game, i, pol) == pytest.approx(phi, abs=1e-14)

    def test_utility_equals_marginal_inner_product(self, rng):
        game = make_general_potential(3, 4, seed=12)
        pol = random_policy(rng, 3, 4)
        for i in range(3):
            r = marginalized_utility(game, i, pol)
            assert expected_utility(game, i, pol) == pytest.approx(
                float(np.dot(r, pol.probs[i])), abs=1e-12
            )

    def test_mixed_strategy_potential_identity(self, rng):
        # Unilateral policy change moves utility and potential by the same amount.
        game = make_general_potential(3, 3, seed=13)
        for _ in range(5):
            pol = random_policy(rng, 3, 3)
            for i in range(3):
                lp = pol.log_probs.copy()
                lp[i] = random_policy(rng, 1, 3).log_probs[0]
                dev = JointPolicy(lp)
                du = expected_utility(game, i, dev) - expected_utility(game, i, pol)
                dphi = expected_potential(game, dev) - expected_potential(game, pol)
                assert du == pytest.approx(dphi, abs=1e-10)

    def test_dimension_mismatch(self):
        game = make_identical_interest(2, 3, seed=0)
        with pytest.raises(ValueError):
            expected_potential(game, uniform_policy(2, 4))
        with pytest.raises(ValueError):
            expected_utility(game, 0, uniform_policy(3, 3))


class TestSerialization:
    def test_round_trip_identical(self, tmp_path):
        game = make_identical_interest(3, 4, seed=77)
        path = tmp_path / "g.pg"
        save_game(game, path)
        loaded = load_game(path)
        assert np.array_equal(loaded.potential, game.potential)
        assert loaded.is_identical_interest
        assert (loaded.num_agents, loaded.num_actions) == (3, 4)
        assert loaded.phi_max == game.phi_max
        assert loaded.seed == 77 and loaded.kind == "identical"

    def test_round_trip_general(self, tmp_path):
        game = make_general_potential(2, 5, seed=3)
        path = tmp_path / "g.pg"
        save_game(game, path)
        loaded = load_game(path)
        for u, v in zip(loaded.utilities, game.utilities):
            assert np.array_equal(u, v)

    def test_resave_is_byte_identical(self, tmp_path):
        game = make_general_potential(2, 3, seed=5)
        p1, p2 = tmp_path / "a.pg", tmp_path / "b.pg"
        save_game(game, p1)
        save_game(load_game(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pg"
        path.write_bytes(b"NOTAGAME" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            load_game(path)

    def test_summary_mentions_empirical_max(self):
        game = make_identical_interest(2, 4, seed=1)
        text = summarize_game(game)
        assert "phi empirical max" in text
        assert "phi_max (declared bound): 1" in text
