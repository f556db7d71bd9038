#!/usr/bin/env python3
"""Why checking quorum intersection is hard: formulas become networks.

Every 3CNF formula turns into a network whose quorum intersection holds
exactly when the formula is unsatisfiable, and any disjoint quorum pair
decodes back into a satisfying assignment. Deciding intersection is
therefore as hard as refuting formulas, and these networks make sharp
test instances.
"""

import random

from quorumlens import (
    brute_sat,
    check_quorum_intersection,
    check_slice_addition,
    cnf_to_network,
    decode_qi_witness,
    parse_dimacs,
    satisfies,
    serialize_dimacs,
    slice_addition_instance,
)


def run_formula(cnf, label):
    net = cnf_to_network(cnf)
    report = check_quorum_intersection(net, max_nodes=len(net.nodes))
    model = brute_sat(cnf)
    print(f"{label}: {len(net.nodes)} nodes, intersection holds = {report.holds}, "
          f"satisfiable = {model is not None}")
    if not report.holds:
        decoded = decode_qi_witness(cnf, report.witness)
        assert satisfies(cnf, decoded)
        side = next(q for q in report.witness if "z0" in q)
        print(f"   split side {sorted(side)}")
        print(f"   decodes to assignment {decoded}, which satisfies the formula")


sat_text = "p cnf 2 2\n1 2 0\n-1 2 0\n"
unsat_text = "p cnf 1 2\n1 0\n-1 0\n"

print("== a satisfiable formula ==")
sat_cnf = parse_dimacs(sat_text)
run_formula(sat_cnf, "(x1 | x2) & (~x1 | x2)")

print("\n== an unsatisfiable formula ==")
unsat_cnf = parse_dimacs(unsat_text)
run_formula(unsat_cnf, "x1 & ~x1")

print("\n== the incremental version: one new coalition ==")
base, node, extra = slice_addition_instance(parse_dimacs("p cnf 1 1\n1 0\n"))
print(f"base network keeps intersection; candidate coalition {sorted(extra)} for {node}")
after = check_slice_addition(base, node, extra, max_nodes=len(base.nodes))
print("adding it preserves intersection?", after.holds,
      "(the formula is satisfiable, so the split reopens)")

print("\n== round-trip through DIMACS ==")
print(serialize_dimacs(sat_cnf), end="")
assert parse_dimacs(serialize_dimacs(sat_cnf)) == sat_cnf
print("parse(serialize(f)) == f")

print("\n== a random batch, oracle-checked ==")
rng = random.Random(12)
agree = 0
for _ in range(20):
    clauses = tuple(
        tuple(rng.choice([-1, 1]) * rng.randint(1, 3) for _ in range(3))
        for _ in range(rng.randint(1, 9))
    )
    from quorumlens import Cnf

    cnf = Cnf(3, clauses)
    net = cnf_to_network(cnf)
    report = check_quorum_intersection(net, max_nodes=len(net.nodes))
    assert report.holds == (brute_sat(cnf) is None)
    agree += 1
print(f"intersection <-> unsatisfiability agreed on {agree}/20 random formulas")
