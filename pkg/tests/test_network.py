"""Core model: validation, observation, forks, and closure."""

import random
from fractions import Fraction

import pytest

import nets
import oracles
from quorumlens import (
    BudgetExceededError,
    NetworkValidationError,
    OpinionProfile,
    QuotaNetwork,
    QuotaRangeWarning,
    TrustNetwork,
    closure_fixpoint,
    closure_step,
    enumerate_profiles,
    find_fork,
    find_strong_fork,
    network_violations,
    observed_set,
    profile_violations,
    threshold,
    validate_network,
    validates,
    with_veto_slices,
)


class TestValidation:
    def test_two_triangles_valid(self):
        assert network_violations(nets.two_triangles()) == []
        assert validate_network(nets.two_triangles()) is not None

    def test_single_vetoed_valid(self):
        assert network_violations(nets.single_vetoed()) == []

    def test_slice_outside_trust_set(self):
        net = TrustNetwork(
            nodes=("i", "j"),
            byzantine=frozenset(),
            trust={"i": frozenset({"i"}), "j": frozenset({"j"})},
            slices={"i": (frozenset({"j"}),), "j": (frozenset({"j"}),)},
        )
        problems = network_violations(net)
        assert any("slice outside trust set" in p for p in problems)
        with pytest.raises(NetworkValidationError):
            validate_network(net)

    def test_duplicate_labels(self):
        net = TrustNetwork(
            nodes=("i", "i"),
            byzantine=frozenset(),
            trust={"i": frozenset({"i"})},
            slices={"i": (frozenset({"i"}),)},
        )
        assert any("duplicate" in p for p in network_violations(net))

    def test_empty_trust_set(self):
        net = QuotaNetwork(
            nodes=("i",),
            byzantine=frozenset(),
            trust={"i": frozenset()},
            quota={"i": Fraction(1)},
        )
        assert any("empty trust set" in p for p in network_violations(net))

    def test_vetoed_flag_requires_singletons(self):
        base = nets.two_triangles()
        net = TrustNetwork(base.nodes, base.byzantine, base.trust, base.slices, vetoed=True)
        problems = network_violations(net)
        assert len([p for p in problems if "vetoed" in p]) == 6

    def test_quota_out_of_range(self):
        net = QuotaNetwork(
            nodes=("i",),
            byzantine=frozenset(),
            trust={"i": frozenset({"i"})},
            quota={"i": Fraction(1, 2)},
        )
        assert any("out of range" in p for p in network_violations(net))

    def test_low_quota_warns_but_validates(self):
        net = QuotaNetwork(
            nodes=("i", "j"),
            byzantine=frozenset(),
            trust={n: frozenset({"i", "j"}) for n in "ij"},
            quota={n: Fraction(3, 5) for n in "ij"},
        )
        with pytest.warns(QuotaRangeWarning):
            assert network_violations(net) == []

    def test_large_byz_fraction_warns_but_validates(self):
        # Unanimous quota with an assumed third of each trust set Byzantine
        # is inconsistent with b = 1 - q, yet must stay expressible.
        with pytest.warns(QuotaRangeWarning):
            assert network_violations(nets.split_quota()) == []

    def test_no_honest_nodes(self):
        net = TrustNetwork(("i",), frozenset({"i"}), {}, {})
        assert any("no honest nodes" in p for p in network_violations(net))


class TestObservedSet:
    def test_split_group_two_sees_three_zeros(self):
        net, profile = nets.split_quota(), nets.split_quota_profile()
        assert observed_set(net, profile, "4", 0) == frozenset("345")
        assert observed_set(net, profile, "5", 0) == frozenset("345")

    def test_split_group_one_sees_three_ones(self):
        net, profile = nets.split_quota(), nets.split_quota_profile()
        assert observed_set(net, profile, "1", 1) == frozenset("123")

    def test_byzantine_observer_rejected(self):
        net, profile = nets.split_quota(), nets.split_quota_profile()
        with pytest.raises(ValueError):
            observed_set(net, profile, "3", 0)

    def test_partition_of_revealed_trust_set(self):
        rng = random.Random(11)
        net = nets.split_quota()
        for profile in list(enumerate_profiles(net))[:64]:
            for i in net.honest:
                ones = observed_set(net, profile, i, 1)
                zeros = observed_set(net, profile, i, 0)
                assert not (ones & zeros)
                assert ones | zeros <= net.trust[i]
                for n in net.trust[i]:
                    if n not in net.byzantine:
                        assert (n in ones) != (n in zeros)
        # An unrevealed Byzantine node counts toward neither value.
        partial = OpinionProfile({"1": 1, "2": 1, "4": 0, "5": 0}, {"3": {"1": 1}})
        assert "3" not in observed_set(net, partial, "4", 0)
        assert "3" not in observed_set(net, partial, "4", 1)
        assert "3" in observed_set(net, partial, "1", 1)
        del rng

    def test_profile_violations(self):
        net = nets.split_quota()
        assert profile_violations(net, nets.split_quota_profile()) == []
        partial = OpinionProfile({"1": 1, "2": 1, "4": 0, "5": 0}, {"3": {"1": 1}})
        assert any("no reveal" in p for p in profile_violations(net, partial))


class TestValidates:
    def test_quota_threshold_met(self):
        net = nets.shared_five()
        profile = OpinionProfile({n: 1 if n in "1234" else 0 for n in "123456"}, {})
        # 4 supporters meet ceil(0.8 * 5) = 4.
        assert threshold(net, "6") == 4
        assert validates(net, profile, "6", 1)

    def test_quota_threshold_missed(self):
        net = nets.shared_five()
        profile = OpinionProfile({n: 1 if n in "123" else 0 for n in "123456"}, {})
        assert not validates(net, profile, "6", 1)

    def test_veto_slice_validates_own_opinion(self):
        net = nets.single_vetoed()
        profile = OpinionProfile({"i": 1}, {})
        assert validates(net, profile, "i", 1)
        assert not validates(net, profile, "i", 0)

    def test_monotone_in_supporters(self):
        # Adding an honest supporter never falsifies validation.
        rng = random.Random(5)
        for trial in range(40):
            net = oracles.random_explicit_net(rng, rng.randint(2, 5))
            profiles = list(enumerate_profiles(net))
            for profile in profiles[:32]:
                for i in net.honest:
                    if not validates(net, profile, i, 1):
                        continue
                    flipped = dict(profile.honest_opinions)
                    zeros = [n for n, v in flipped.items() if v == 0]
                    if not zeros:
                        continue
                    flipped[rng.choice(zeros)] = 1
                    richer = OpinionProfile(flipped, profile.byzantine_reveals)
                    assert validates(net, richer, i, 1)


class TestFindFork:
    def test_split_quota_fork(self):
        net = nets.split_quota()
        witness = find_fork(net)
        assert witness is not None
        assert witness.node_a == "1" and witness.value_a == 1
        assert witness.node_b == "4" and witness.value_b == 0
        assert validates(net, witness.profile, "1", 1)
        assert validates(net, witness.profile, "4", 0)
        # The bridging Byzantine node reveals opposite values to the two sides.
        reveals = witness.profile.byzantine_reveals["3"]
        assert reveals["1"] == 1 and reveals["4"] == 0
        assert profile_violations(net, witness.profile) == []

    def test_two_triangles_fork_despite_no_byzantine(self):
        net = nets.two_triangles()
        witness = find_fork(net)
        assert witness is not None
        assert not (witness.supporting_a & witness.supporting_b)
        assert oracles.forked_by_profile_enumeration(net)

    def test_single_vetoed_safe(self):
        assert find_fork(nets.single_vetoed()) is None

    def test_unanimity_safe(self):
        assert find_fork(nets.unanimity()) is None

    def test_pairwise_criterion_matches_profile_enumeration(self):
        rng = random.Random(23)
        checked_forked = checked_safe = 0
        for trial in range(60):
            net = oracles.random_explicit_net(
                rng,
                rng.randint(2, 6),
                max_slices=3,
                max_slice_size=3,
                byz_count=rng.randint(0, 1),
            )
            got = find_fork(net) is not None
            expected = oracles.forked_by_profile_enumeration(net)
            assert got == expected, net
            if expected:
                checked_forked += 1
            else:
                checked_safe += 1
        assert checked_forked >= 5 and checked_safe >= 5

    def test_quota_arithmetic_matches_profile_enumeration(self):
        rng = random.Random(77)
        forked = safe = 0
        for trial in range(40):
            n = rng.randint(2, 5)
            net = oracles.random_uniform_quota_net(
                rng, n, Fraction(3, 4), byz_count=rng.randint(0, min(1, n - 1))
            )
            got = find_fork(net) is not None
            expected = oracles.forked_by_profile_enumeration(net)
            assert got == expected, net
            forked += expected
            safe += not expected
        assert forked >= 3 and safe >= 3

    def test_witness_profiles_always_validate(self):
        rng = random.Random(29)
        for trial in range(60):
            net = oracles.random_explicit_net(
                rng, rng.randint(2, 6), byz_count=rng.randint(0, 2)
            )
            witness = find_fork(net)
            if witness is None:
                continue
            assert validates(net, witness.profile, witness.node_a, witness.value_a)
            assert validates(net, witness.profile, witness.node_b, witness.value_b)
            assert witness.value_b == 1 - witness.value_a
            assert profile_violations(net, witness.profile) == []

    def test_budget_exceeded(self):
        with pytest.raises(BudgetExceededError):
            find_fork(nets.two_triangles(), max_nodes=3)
        with pytest.raises(BudgetExceededError):
            find_fork(nets.two_triangles(), max_total_slices=2)


class TestClosure:
    def test_unique_selector_reaches_triangle(self):
        net = nets.two_triangles()
        selector = {n: net.slices[n][0] for n in net.honest}
        first = closure_step(net, selector, {"1"})
        assert first == nets.TRI_A
        assert closure_step(net, selector, first) == nets.TRI_A

    def test_empty_seed(self):
        net = nets.two_triangles()
        selector = {n: net.slices[n][0] for n in net.honest}
        assert closure_step(net, selector, frozenset()) == frozenset()

    def test_full_seed_stays_inside(self):
        net = nets.two_triangles()
        selector = {n: net.slices[n][0] for n in net.honest}
        assert closure_step(net, selector, net.nodes) <= frozenset(net.nodes)

    def test_monotone_and_fixpoint_within_node_count(self):
        rng = random.Random(3)
        for trial in range(30):
            net = oracles.random_explicit_net(rng, rng.randint(2, 6))
            selector = {i: rng.choice(net.slices[i]) for i in net.honest}
            seed_small = frozenset(rng.sample(list(net.nodes), 1))
            seed_big = seed_small | frozenset(rng.sample(list(net.nodes), 2))
            assert closure_step(net, selector, seed_small) <= closure_step(
                net, selector, seed_big
            )
            current = seed_big
            seen = [current]
            for _ in range(len(net.nodes)):
                current = closure_step(net, selector, current)
                seen.append(current)
            assert closure_step(net, selector, current) == current

    def test_rejects_non_slice(self):
        net = nets.two_triangles()
        selector = {n: net.slices[n][0] for n in net.honest}
        selector["1"] = frozenset({"1", "2"})
        with pytest.raises(ValueError, match="non-slice"):
            closure_step(net, selector, {"1"})

    def test_closure_fixpoint_is_self_supporting(self):
        net = nets.two_triangles()
        selector = {n: net.slices[n][0] for n in net.honest}
        assert closure_fixpoint(net, selector, {"4"}) == nets.TRI_B


class TestFindStrongFork:
    def test_vetoed_triangles_strongly_fork(self):
        net = nets.two_triangles_vetoed()
        witness = find_strong_fork(net)
        assert witness is not None and witness.kind == "strong-fork"
        q_a, q_b = witness.supporting_a, witness.supporting_b
        from quorumlens import is_quorum

        assert is_quorum(net, q_a) and is_quorum(net, q_b)
        assert not (q_a & q_b & frozenset(net.honest))
        assert validates(net, witness.profile, witness.node_a, witness.value_a)
        assert validates(net, witness.profile, witness.node_b, witness.value_b)

    def test_plain_triangles_fork_along_triples(self):
        # Every coalition already contains its owner here, so the strong
        # fork runs along the two triangles themselves.
        witness = find_strong_fork(nets.two_triangles())
        assert witness is not None
        assert {witness.supporting_a, witness.supporting_b} == {nets.TRI_A, nets.TRI_B}

    def test_unanimity_weakly_safe(self):
        assert find_strong_fork(nets.unanimity()) is None
        assert find_strong_fork(nets.unanimity(byz="d")) is None

    def test_singleton_veto_slices_fork_trivially(self):
        # A singleton veto slice is a self-supporting quorum of one, so
        # any two honest nodes can strongly fork on their own.
        assert find_strong_fork(with_veto_slices(nets.unanimity())) is not None

    def test_agrees_with_selector_enumeration(self):
        for net in (nets.two_triangles(), nets.two_triangles_vetoed(), nets.unanimity()):
            assert (find_strong_fork(net) is not None) == (
                oracles.strong_forked_by_selector_enumeration(net)
            )

    def test_selector_oracle_on_random_networks(self):
        rng = random.Random(41)
        seen_forked = seen_safe = 0
        for trial in range(30):
            net = oracles.random_explicit_net(
                rng,
                rng.randint(2, 5),
                max_slices=2,
                max_slice_size=3,
                byz_count=rng.randint(0, 1),
                self_in_slices=True,
            )
            got = find_strong_fork(net) is not None
            expected = oracles.strong_forked_by_selector_enumeration(net)
            assert got == expected, net
            seen_forked += got
            seen_safe += not got
        assert seen_forked >= 3 and seen_safe >= 3

    def test_safety_implies_weak_safety(self):
        rng = random.Random(59)
        for trial in range(60):
            net = oracles.random_explicit_net(
                rng,
                rng.randint(2, 5),
                max_slices=2,
                max_slice_size=3,
                byz_count=rng.randint(0, 1),
                vetoed=bool(trial % 2),
                self_in_slices=not bool(trial % 2),
            )
            if find_fork(net) is None:
                assert find_strong_fork(net) is None


def test_enumerate_profiles_counts():
    net = nets.split_quota()
    # 4 honest bits, one Byzantine node revealing to 4 observers.
    assert sum(1 for _ in enumerate_profiles(net)) == 2**4 * 2**4
