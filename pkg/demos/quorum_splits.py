#!/usr/bin/env python3
"""Two triangles, one broken ledger: quorum intersection by example.

Six nodes form two triangles. Nodes 1-3 each require agreement of
{1,2,3}; nodes 4-6 require {4,5,6}. Each triangle can settle opinions on
its own, so the network can split. One extra edge repairs it.
"""

from quorumlens import (
    TrustNetwork,
    check_quorum_intersection,
    check_slice_addition,
    find_strong_fork,
    is_quorum,
    minimal_quora,
)

TRI_A = frozenset({"1", "2", "3"})
TRI_B = frozenset({"4", "5", "6"})

triangles = TrustNetwork(
    nodes=tuple("123456"),
    byzantine=frozenset(),
    trust={n: (TRI_A if n in TRI_A else TRI_B) for n in "123456"},
    slices={n: ((TRI_A if n in TRI_A else TRI_B),) for n in "123456"},
)

print("== the two-triangle network ==")
for probe in ("123", "12", "123456", "1234"):
    print(f"  is_quorum({{{','.join(probe)}}}) = {is_quorum(triangles, probe)}")
print("  minimal quora:", [sorted(q) for q in minimal_quora(triangles)])

report = check_quorum_intersection(triangles)
print("\nquorum intersection holds?", report.holds)
q_a, q_b = report.witness
print(f"  witness: {sorted(q_a)} and {sorted(q_b)} never overlap")

witness = find_strong_fork(triangles)
print("\nstrong fork?", witness is not None)
print(f"  {witness.node_a} settles on {witness.value_a} backed by {sorted(witness.supporting_a)}")
print(f"  {witness.node_b} settles on {witness.value_b} backed by {sorted(witness.supporting_b)}")
print("  each side supports itself forever; the ledger has forked.")

# Repair: node 3 additionally listens to node 5.
bridged_slices = dict(triangles.slices)
bridged_slices["3"] = (frozenset({"1", "2", "3", "5"}),)
bridged_trust = dict(triangles.trust)
bridged_trust["3"] = frozenset({"1", "2", "3", "5"})
bridged = TrustNetwork(triangles.nodes, frozenset(), bridged_trust, bridged_slices)

print("\n== after node 3 also requires node 5 ==")
print("quorum intersection holds?", check_quorum_intersection(bridged).holds)
print("  minimal quora:", [sorted(q) for q in minimal_quora(bridged)])
print("  {1,2,3} alone is no longer a quorum: node 3 now needs node 5.")

# And the incremental question a joining node faces: does granting node 3
# its old coalition {1,2,3} back stay safe? (No: it reopens the split.)
incremental = check_slice_addition(bridged, "3", frozenset("123"))
print("\nre-adding {1,2,3} as a coalition for node 3 keeps intersection?", incremental.holds)
q_a, q_b = incremental.witness
print(f"  witness: {sorted(q_a)} vs {sorted(q_b)}")
