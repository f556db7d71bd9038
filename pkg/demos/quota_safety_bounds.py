#!/usr/bin/env python3
"""What quota rules force: observation bounds, overlap, and common trust.

A five-node network split into two trust groups bridged by one Byzantine
node shows how a double-dealing bridge forks unanimous-quota groups, and
how the observation bound is attained exactly. Then the overlap bound:
safety under a uniform quota pushes trust sets to overlap so much that,
for generator-shaped topologies, somebody ends up trusted by everyone.
"""

from fractions import Fraction
import warnings

from quorumlens import (
    GenParams,
    QuotaNetwork,
    check_overlap_bounds,
    common_trust_set,
    expand_quota_network,
    find_fork,
    observation_bounds,
    overlap_premise_holds,
    random_quota_network,
    shared_byzantine_bound,
    validates,
)

warnings.filterwarnings("ignore")  # the split network deliberately stretches b

split = QuotaNetwork(
    nodes=tuple("12345"),
    byzantine=frozenset("3"),
    trust={
        "1": frozenset("123"),
        "2": frozenset("123"),
        "4": frozenset("345"),
        "5": frozenset("345"),
    },
    quota={n: Fraction(1) for n in "1245"},
    byz_fraction={n: Fraction(1, 3) for n in "1245"},
)

print("== the bridged split network ==")
witness = find_fork(split)
print(f"fork: {witness.node_a} validates {witness.value_a}, "
      f"{witness.node_b} validates {witness.value_b}")
print("  node 3 reveals", witness.profile.byzantine_reveals["3"])
assert validates(split, witness.profile, "1", 1)
assert validates(split, witness.profile, "4", 0)

cap = shared_byzantine_bound(split, "1", "4")
print(f"\nshared Byzantine cap for (1, 4): {cap}")
bounds = observation_bounds(split, witness.profile, "1", "4", 1)
print(f"node 4 sees {bounds.opposite_seen} supporters of the opposite value; "
      f"the ceiling is {bounds.opposite_ceiling} (attained exactly)")

print("\n== overlap bounds on a generator-shaped network ==")
net = random_quota_network(
    GenParams(9, 5, Fraction(4, 5), seed=11, topology="overlapping-groups", overlap=0.6)
)
for row in check_overlap_bounds(net):
    mark = "ok " if row.satisfies else "VIOLATED"
    print(f"  {row.pair}: |T_i & T_j| = {row.intersection_size} "
          f"vs bound {row.bound} -> {mark}")
print("common trust:", sorted(common_trust_set(net)) or "(empty)")
print("pairwise 0.25-overlap premise holds:", overlap_premise_holds(net))

print("\n== quota networks expand to explicit coalitions ==")
tiny = QuotaNetwork(
    nodes=tuple("abc"),
    byzantine=frozenset(),
    trust={n: frozenset("abc") for n in "abc"},
    quota={n: Fraction(2, 3) for n in "abc"},
)
expanded = expand_quota_network(tiny)
print("threshold-2 of 3 trustees becomes coalitions:",
      [sorted(s) for s in expanded.slices["a"]])

print("\n== a boundary the pairwise argument cannot cross ==")
labels = [f"n{k}" for k in range(1, 7)]
ring = QuotaNetwork(
    nodes=tuple(labels),
    byzantine=frozenset(),
    trust={
        labels[k]: frozenset(x for x in labels if x != labels[(k + 3) % 6])
        for k in range(6)
    },
    quota={i: Fraction(4, 5) for i in labels},
)
print("exclusion ring: each node trusts everyone but one")
print("  every pair overlaps in 4 > 2.5, premise holds:", overlap_premise_holds(ring))
print("  yet common trust is", sorted(common_trust_set(ring)) or "EMPTY",
      "- pairwise overlap alone cannot force an all-trusted node")
