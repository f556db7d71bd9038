"""Quorum enumeration and quorum-intersection checking with exact witnesses.

A non-empty node set is a quorum when every member finds one of its
winning coalitions inside the set; Byzantine members only need to belong
(their implicit coalition is their own singleton). Deciding whether every
two quora intersect is intractable in general, so the checkers here are
exact searches behind explicit budgets:

* explicit-slice networks use memoized closure of slice choices, which
  enumerates a superset of the inclusion-minimal quora and tests each
  against the largest quorum of its complement;
* quota networks use a pivot-fixed scan over candidate splits, pruned by
  the greatest-fixpoint operator :func:`max_quorum_within`.

Both report a witness pair of quora whenever intersection fails, and a
budget overrun is always a distinct outcome, never a verdict.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .network import (
    BudgetExceededError,
    Network,
    NodeId,
    TrustNetwork,
    threshold,
)

DEFAULT_QI_MAX_NODES = 20
DEFAULT_MINIMAL_MAX_NODES = 16
DEFAULT_MAX_SEARCH_STATES = 2_000_000


@dataclass(frozen=True)
class QuorumReport:
    """Outcome of a quorum-intersection check.

    When ``holds`` is false, ``witness`` carries two quora whose
    intersection is empty (or contains no honest node, for the honest
    variant). ``quora_examined`` counts candidate quora or splits tested.
    """

    holds: bool
    witness: tuple[frozenset[NodeId], frozenset[NodeId]] | None
    quora_examined: int
    minimal_quora: tuple[frozenset[NodeId], ...] | None = None


class _Masks:
    """Bitmask view of a network: node order fixes bit positions."""

    def __init__(self, net: Network):
        self.net = net
        self.order = list(net.nodes)
        self.index = {n: k for k, n in enumerate(self.order)}
        self.full = (1 << len(self.order)) - 1
        self.byz_mask = self._mask(net.byzantine)
        self.honest_mask = self.full & ~self.byz_mask
        if isinstance(net, TrustNetwork):
            self.slice_masks: list[list[int]] = []
            for n in self.order:
                if n in net.byzantine:
                    self.slice_masks.append([1 << self.index[n]])
                else:
                    self.slice_masks.append([self._mask(s) for s in net.slices[n]])
            self.quota_req = None
        else:
            self.slice_masks = []
            self.quota_req = []
            for n in self.order:
                if n in net.byzantine:
                    self.quota_req.append((1 << self.index[n], 1))
                else:
                    self.quota_req.append((self._mask(net.trust[n]), threshold(net, n)))

    def _mask(self, labels) -> int:
        m = 0
        for x in labels:
            m |= 1 << self.index[x]
        return m

    def labels(self, mask: int) -> frozenset[NodeId]:
        return frozenset(self.order[k] for k in range(len(self.order)) if (mask >> k) & 1)

    def satisfied(self, idx: int, members: int) -> bool:
        """Does node ``idx`` find a winning coalition inside ``members``?"""
        if (self.byz_mask >> idx) & 1:
            return True
        if self.quota_req is not None:
            tmask, need = self.quota_req[idx]
            return (tmask & members).bit_count() >= need
        return any(s & members == s for s in self.slice_masks[idx])

    def max_quorum(self, within: int) -> int:
        """Largest quorum contained in ``within`` (0 when none exists).

        Computed by deleting members with no coalition inside the
        surviving set until stable; the fixpoint contains every quorum
        that fits in ``within``.
        """
        current = within
        changed = True
        while changed and current:
            changed = False
            m = current
            while m:
                low = m & -m
                m ^= low
                idx = low.bit_length() - 1
                if not self.satisfied(idx, current):
                    current ^= low
                    changed = True
        return current

    def is_quorum(self, members: int) -> bool:
        if not members:
            return False
        m = members
        while m:
            low = m & -m
            m ^= low
            if not self.satisfied(low.bit_length() - 1, members):
                return False
        return True


def _masks(net: Network) -> _Masks:
    return _Masks(net)


def is_quorum(net: Network, q) -> bool:
    """True when ``q`` is non-empty and self-supporting inside itself."""
    members = frozenset(q)
    unknown = sorted(members - set(net.nodes))
    if unknown:
        raise ValueError(f"unknown nodes in candidate quorum: {', '.join(unknown)}")
    masks = _masks(net)
    return masks.is_quorum(masks._mask(members))


def max_quorum_within(net: Network, s) -> frozenset[NodeId]:
    """The unique largest quorum contained in ``s``; empty if none exists."""
    members = frozenset(s)
    unknown = sorted(members - set(net.nodes))
    if unknown:
        raise ValueError(f"unknown nodes in candidate set: {', '.join(unknown)}")
    masks = _masks(net)
    return masks.labels(masks.max_quorum(masks._mask(members)))


# ---------------------------------------------------------------------------
# Generated-quorum enumeration (explicit-slice networks)


def _iter_generated_quora(
    masks: _Masks,
    universe: int,
    seeds: list[int],
    max_states: int = DEFAULT_MAX_SEARCH_STATES,
):
    """Yield quorum masks grown from ``seeds`` by closing slice choices.

    Every inclusion-minimal quorum inside ``universe`` that contains one
    of the seed sets is produced: from any partial set, the first member
    still lacking a contained coalition branches over its coalitions.
    States are memoized, so each partial set expands once.
    """
    visited: set[int] = set()
    completed: set[int] = set()
    for seed in seeds:
        if seed & ~universe:
            continue
        stack = [seed]
        while stack:
            q = stack.pop()
            if q in visited:
                continue
            visited.add(q)
            if len(visited) > max_states:
                raise BudgetExceededError(
                    f"quorum search exceeded {max_states} states"
                )
            unsat = -1
            m = q
            while m:
                low = m & -m
                m ^= low
                idx = low.bit_length() - 1
                if not masks.satisfied(idx, q):
                    unsat = idx
                    break
            if unsat < 0:
                if q not in completed:
                    completed.add(q)
                    yield q
                continue
            for smask in masks.slice_masks[unsat]:
                child = q | smask
                if child & ~universe:
                    continue
                if child not in visited:
                    stack.append(child)


def minimal_quora(
    net: Network,
    *,
    max_nodes: int = DEFAULT_MINIMAL_MAX_NODES,
    max_states: int = DEFAULT_MAX_SEARCH_STATES,
) -> tuple[frozenset[NodeId], ...]:
    """All inclusion-minimal quora, sorted by size then node order.

    Raises:
        BudgetExceededError: when the instance exceeds ``max_nodes`` or the
            enumeration exceeds ``max_states``.
    """
    if len(net.nodes) > max_nodes:
        raise BudgetExceededError(
            f"{len(net.nodes)} nodes exceeds the minimal-quora budget of {max_nodes}"
        )
    masks = _masks(net)
    top = masks.max_quorum(masks.full)
    candidates: list[int] = []
    if isinstance(net, TrustNetwork):
        seeds = [1 << k for k in range(len(masks.order)) if (top >> k) & 1]
        candidates = list(_iter_generated_quora(masks, top, seeds, max_states))
    else:
        bits = [k for k in range(len(masks.order)) if (top >> k) & 1]
        # Increasing-size scan; supersets of a known quorum are skipped.
        found: list[int] = []
        for size in range(1, len(bits) + 1):
            from itertools import combinations

            for combo in combinations(bits, size):
                m = 0
                for k in combo:
                    m |= 1 << k
                if any(f & m == f for f in found):
                    continue
                if masks.is_quorum(m):
                    found.append(m)
        candidates = found
    minimal = [
        q
        for q in candidates
        if not any(o != q and o & q == o for o in candidates)
    ]
    as_sets = [masks.labels(q) for q in minimal]
    order_key = {n: k for k, n in enumerate(net.nodes)}
    as_sets.sort(key=lambda s: (len(s), sorted(order_key[n] for n in s)))
    return tuple(as_sets)


# ---------------------------------------------------------------------------
# Quorum-intersection checks


def _scan_split(
    masks: _Masks,
    pool_bits: list[int],
    pivot_bit: int,
    base_mask: int,
    accept,
    threads: int,
) -> tuple[int, tuple[int, int] | None]:
    """Scan splits of ``pool_bits``; side one always holds the pivot.

    ``accept(q1, q2)`` decides whether a candidate pair is a violation.
    Returns (splits examined, first witness in lexicographic split order).
    """
    free = [b for b in pool_bits if b != pivot_bit]
    total = 1 << len(free)

    def scan(lo: int, hi: int):
        for code in range(lo, hi):
            side = 1 << pivot_bit
            rest = 0
            for k, b in enumerate(free):
                if (code >> k) & 1:
                    side |= 1 << b
                else:
                    rest |= 1 << b
            q1 = masks.max_quorum(side | base_mask)
            if not q1:
                continue
            q2 = masks.max_quorum(rest | base_mask)
            if not q2:
                continue
            if accept(q1, q2):
                return code, (q1, q2)
        return None, None

    if threads <= 1 or total < 1 << 12:
        code, witness = scan(0, total)
        return total, witness
    chunk = (total + threads - 1) // threads
    ranges = [(k * chunk, min(total, (k + 1) * chunk)) for k in range(threads)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda r: scan(*r), ranges))
    hits = [(code, w) for code, w in results if w is not None]
    if not hits:
        return total, None
    _, witness = min(hits, key=lambda cw: cw[0])
    return total, witness


def check_quorum_intersection(
    net: Network,
    *,
    max_nodes: int = DEFAULT_QI_MAX_NODES,
    max_states: int = DEFAULT_MAX_SEARCH_STATES,
    threads: int = 1,
) -> QuorumReport:
    """Decide whether every two quora of ``net`` intersect.

    Exact and witness-producing: a ``holds=False`` report carries a
    disjoint quorum pair. Budget overruns raise instead of guessing.
    """
    if len(net.nodes) > max_nodes:
        raise BudgetExceededError(
            f"{len(net.nodes)} nodes exceeds the quorum-intersection budget of {max_nodes}"
        )
    masks = _masks(net)
    top = masks.max_quorum(masks.full)
    if not top:
        return QuorumReport(True, None, 0)

    if isinstance(net, TrustNetwork):
        examined = 0
        seeds = [1 << k for k in range(len(masks.order)) if (top >> k) & 1]
        for q in _iter_generated_quora(masks, top, seeds, max_states):
            examined += 1
            other = masks.max_quorum(top & ~q)
            if other:
                return QuorumReport(False, (masks.labels(q), masks.labels(other)), examined)
        return QuorumReport(True, None, examined)

    bits = [k for k in range(len(masks.order)) if (top >> k) & 1]
    examined, witness = _scan_split(
        masks,
        bits,
        bits[0],
        0,
        lambda q1, q2: not (q1 & q2),
        threads,
    )
    if witness is None:
        return QuorumReport(True, None, examined)
    q1, q2 = witness
    return QuorumReport(False, (masks.labels(q1), masks.labels(q2)), examined)


def check_qi_honest(
    net: Network,
    *,
    max_nodes: int = DEFAULT_QI_MAX_NODES,
    max_states: int = DEFAULT_MAX_SEARCH_STATES,
    threads: int = 1,
) -> QuorumReport:
    """Decide whether every two quora share at least one honest node.

    Only quora containing an honest node take part: a pair of quora whose
    honest parts are disjoint is exactly what lets two honest groups
    settle on opposite values, so this check reports weak safety of a
    vetoed network. Purely Byzantine quora can never witness a violation.
    """
    if len(net.nodes) > max_nodes:
        raise BudgetExceededError(
            f"{len(net.nodes)} nodes exceeds the quorum-intersection budget of {max_nodes}"
        )
    masks = _masks(net)
    top = masks.max_quorum(masks.full)
    if not (top & masks.honest_mask):
        return QuorumReport(True, None, 0)

    if isinstance(net, TrustNetwork):
        examined = 0
        seeds = [
            1 << k
            for k in range(len(masks.order))
            if (top >> k) & 1 and (masks.honest_mask >> k) & 1
        ]
        for q in _iter_generated_quora(masks, top, seeds, max_states):
            examined += 1
            other = masks.max_quorum(top & ~(q & masks.honest_mask))
            if other & masks.honest_mask and not (other & q & masks.honest_mask):
                return QuorumReport(False, (masks.labels(q), masks.labels(other)), examined)
        return QuorumReport(True, None, examined)

    honest_bits = [
        k for k in range(len(masks.order)) if (masks.honest_mask >> k) & 1
    ]
    byz_in_top = top & masks.byz_mask
    examined, witness = _scan_split(
        masks,
        honest_bits,
        honest_bits[0],
        byz_in_top,
        lambda q1, q2: bool(q1 & masks.honest_mask)
        and bool(q2 & masks.honest_mask)
        and not (q1 & q2 & masks.honest_mask),
        threads,
    )
    if witness is None:
        return QuorumReport(True, None, examined)
    q1, q2 = witness
    return QuorumReport(False, (masks.labels(q1), masks.labels(q2)), examined)


def check_slice_addition(
    base: TrustNetwork,
    node: NodeId,
    new_slice,
    *,
    max_nodes: int = DEFAULT_QI_MAX_NODES,
    max_states: int = DEFAULT_MAX_SEARCH_STATES,
) -> QuorumReport:
    """Decide quorum intersection after granting ``node`` one extra slice.

    Requires the base network to satisfy quorum intersection already; any
    fresh disjoint pair must have one side built on the new slice, so the
    search grows that side from ``{node} | new_slice`` instead of
    re-running the full check.

    Raises:
        ValueError: when the base network fails quorum intersection or the
            slice is not drawn from the node's trust set.
    """
    if not isinstance(base, TrustNetwork):
        raise TypeError("slice addition expects an explicit-slice network")
    slice_set = frozenset(new_slice)
    if node in base.byzantine or node not in base.trust:
        raise ValueError(f"node {node!r} is not an honest node of the network")
    if not slice_set or not slice_set <= base.trust[node]:
        raise ValueError("new slice must be a non-empty subset of the node's trust set")
    base_report = check_quorum_intersection(
        base, max_nodes=max_nodes, max_states=max_states
    )
    if not base_report.holds:
        raise ValueError(
            "base network fails quorum intersection; slice addition requires a sound base"
        )

    slices = dict(base.slices)
    if slice_set in slices[node]:
        return QuorumReport(True, None, 0)
    slices[node] = slices[node] + (slice_set,)
    extended = TrustNetwork(base.nodes, base.byzantine, base.trust, slices, base.vetoed)

    masks = _masks(extended)
    top = masks.max_quorum(masks.full)
    anchor = masks._mask(slice_set | {node})
    if anchor & ~top:
        return QuorumReport(True, None, 0)
    examined = 0
    for q in _iter_generated_quora(masks, top, [anchor], max_states):
        examined += 1
        other = masks.max_quorum(top & ~q)
        if other:
            return QuorumReport(False, (masks.labels(q), masks.labels(other)), examined)
    return QuorumReport(True, None, examined)
