"""Core data model for trust networks with Byzantine participants.

A network is a set of nodes, a Byzantine subset, and, for every honest
node, a trust set plus the winning coalitions (slices) drawn from it that
can settle the node's opinion. Two representations exist:

* :class:`TrustNetwork` lists every slice explicitly.
* :class:`QuotaNetwork` induces slices implicitly: any subset of the
  trust set whose size meets a per-node quota.

On top of the model this module implements opinion profiles, observed
sets, validation of a value by a node, exact fork search, the one-step
coalition-closure operator, and strong-fork search for vetoed networks.
All values are immutable after construction and every operation is a
pure function.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

NodeId = str

DEFAULT_FORK_MAX_NODES = 20
DEFAULT_FORK_MAX_SLICES = 64
DEFAULT_STRONG_FORK_MAX_NODES = 16


class NetworkValidationError(ValueError):
    """Raised when a network breaks a structural invariant.

    The ``violations`` attribute lists one human-readable message per
    broken invariant, each naming the offending node.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class BudgetExceededError(RuntimeError):
    """Raised when an exact search would exceed its configured resource budget.

    Deliberately distinct from any true/false verdict: callers must not
    mistake an aborted search for a safety result.
    """


class QuotaRangeWarning(UserWarning):
    """Quota or Byzantine-fraction value outside the recommended range."""


def as_fraction(value) -> Fraction:
    """Convert a number to an exact rational.

    Floats go through their decimal string form so that e.g. 0.8 becomes
    exactly 4/5 rather than the nearest binary fraction; this keeps quota
    thresholds like ceil(0.8 * 5) == 4 exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a valid rational value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _freeze_sets(mapping: Mapping[NodeId, Iterable[NodeId]]) -> dict[NodeId, frozenset]:
    return {k: frozenset(v) for k, v in mapping.items()}


@dataclass(frozen=True)
class TrustNetwork:
    """Trust network with explicitly listed winning coalitions.

    Fields:
        nodes: all node labels, in a fixed order used for deterministic output.
        byzantine: labels of Byzantine nodes; the rest are honest.
        trust: per honest node, the set of nodes it listens to.
        slices: per honest node, its winning coalitions, each a subset of
            the trust set. A coalition wins as soon as the observed set
            contains it (superset-closed reading).
        vetoed: if set, every honest node must have its own singleton
            among its slices.

    Byzantine nodes carry no trust set or slices; they behave as if their
    only winning coalition were their own singleton.
    """

    nodes: tuple[NodeId, ...]
    byzantine: frozenset[NodeId]
    trust: Mapping[NodeId, frozenset[NodeId]]
    slices: Mapping[NodeId, tuple[frozenset[NodeId], ...]]
    vetoed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "byzantine", frozenset(self.byzantine))
        object.__setattr__(self, "trust", _freeze_sets(self.trust))
        normalized = {}
        for node, family in self.slices.items():
            seen: list[frozenset] = []
            for s in family:
                fs = frozenset(s)
                if fs not in seen:
                    seen.append(fs)
            normalized[node] = tuple(seen)
        object.__setattr__(self, "slices", normalized)

    @property
    def honest(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.nodes if n not in self.byzantine)

    def slices_of(self, node: NodeId) -> tuple[frozenset[NodeId], ...]:
        """Winning coalitions of ``node``; Byzantine nodes get their singleton."""
        if node in self.byzantine:
            return (frozenset({node}),)
        return self.slices[node]


@dataclass(frozen=True)
class QuotaNetwork:
    """Trust network whose slices are induced by per-node quotas.

    A coalition C subset of T_i wins for honest ``i`` exactly when
    ``|C| >= ceil(quota[i] * |T_i|)``. ``byz_fraction[i]`` records the
    fraction of each trust set assumed Byzantine under the failure model;
    it defaults to ``1 - quota[i]``.
    """

    nodes: tuple[NodeId, ...]
    byzantine: frozenset[NodeId]
    trust: Mapping[NodeId, frozenset[NodeId]]
    quota: Mapping[NodeId, Fraction]
    byz_fraction: Mapping[NodeId, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "byzantine", frozenset(self.byzantine))
        object.__setattr__(self, "trust", _freeze_sets(self.trust))
        quota = {k: as_fraction(v) for k, v in self.quota.items()}
        object.__setattr__(self, "quota", quota)
        fractions = {k: as_fraction(v) for k, v in self.byz_fraction.items()}
        for node, q in quota.items():
            fractions.setdefault(node, 1 - q)
        object.__setattr__(self, "byz_fraction", fractions)

    @property
    def honest(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.nodes if n not in self.byzantine)

    @property
    def vetoed(self) -> bool:
        # Quota form expresses a veto only when every threshold is 1 and
        # each node trusts itself.
        return all(
            threshold(self, i) == 1 and i in self.trust[i] for i in self.honest
        )


Network = TrustNetwork | QuotaNetwork


def threshold(net: QuotaNetwork, node: NodeId) -> int:
    """Minimum agreeing coalition size for ``node``: ceil(q_i * |T_i|)."""
    return math.ceil(net.quota[node] * len(net.trust[node]))


@dataclass(frozen=True)
class OpinionProfile:
    """One snapshot of everyone's revealed opinions.

    ``honest_opinions`` maps every honest node to its single opinion in
    {0, 1}. ``byzantine_reveals`` maps each Byzantine node to the value it
    shows each honest observer; an observer with no entry sees nothing
    from that node (the node counts toward neither value for it).
    """

    honest_opinions: Mapping[NodeId, int]
    byzantine_reveals: Mapping[NodeId, Mapping[NodeId, int]]

    def __post_init__(self):
        object.__setattr__(self, "honest_opinions", dict(self.honest_opinions))
        object.__setattr__(
            self,
            "byzantine_reveals",
            {b: dict(m) for b, m in self.byzantine_reveals.items()},
        )


@dataclass(frozen=True)
class ForkWitness:
    """Evidence that two honest nodes can settle on opposite values.

    ``supporting_a`` and ``supporting_b`` are the agreeing coalitions
    (or, for strong forks, the self-supporting quora) behind each side.
    """

    node_a: NodeId
    node_b: NodeId
    value_a: int
    value_b: int
    profile: OpinionProfile
    kind: str  # "fork" | "strong-fork"
    supporting_a: frozenset[NodeId]
    supporting_b: frozenset[NodeId]


# ---------------------------------------------------------------------------
# Validation


def network_violations(net: Network) -> list[str]:
    """Return every broken structural invariant of ``net``, empty if none.

    Recommended-range deviations (quota below 0.75, Byzantine fraction at
    or above 0.25 or above 1 - quota) are reported as warnings, not
    violations, so that failure models departing from the default remain
    expressible.
    """
    problems: list[str] = []
    labels = list(net.nodes)
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        problems.append(f"duplicate node labels: {', '.join(dupes)}")
    for label in labels:
        if not isinstance(label, str) or not label:
            problems.append(f"node label {label!r} is not a non-empty string")
    node_set = set(labels)
    for b in sorted(net.byzantine):
        if b not in node_set:
            problems.append(f"byzantine node {b!r} is not in the node list")
    honest = [n for n in labels if n not in net.byzantine]
    if not honest:
        problems.append("no honest nodes")

    expected = set(honest)
    if set(net.trust) != expected:
        missing = sorted(expected - set(net.trust))
        extra = sorted(set(net.trust) - expected)
        if missing:
            problems.append(f"missing trust sets for: {', '.join(missing)}")
        if extra:
            problems.append(f"trust sets given for non-honest nodes: {', '.join(extra)}")
    for i in honest:
        t = net.trust.get(i)
        if t is None:
            continue
        if not t:
            problems.append(f"node {i}: empty trust set")
        stray = sorted(t - node_set)
        if stray:
            problems.append(f"node {i}: trust set mentions unknown nodes {', '.join(stray)}")

    if isinstance(net, TrustNetwork):
        if set(net.slices) != expected:
            missing = sorted(expected - set(net.slices))
            extra = sorted(set(net.slices) - expected)
            if missing:
                problems.append(f"missing slices for: {', '.join(missing)}")
            if extra:
                problems.append(f"slices given for non-honest nodes: {', '.join(extra)}")
        for i in honest:
            family = net.slices.get(i)
            if family is None:
                continue
            if not family:
                problems.append(f"node {i}: no winning coalitions")
            t = net.trust.get(i, frozenset())
            for s in family:
                if not s:
                    problems.append(f"node {i}: empty winning coalition")
                elif not s <= t:
                    outside = ", ".join(sorted(s - t))
                    problems.append(f"node {i}: slice outside trust set ({outside})")
            if net.vetoed and frozenset({i}) not in family:
                problems.append(f"node {i}: vetoed network but {{'{i}'}} is not a slice")
    else:
        if set(net.quota) != expected:
            missing = sorted(expected - set(net.quota))
            extra = sorted(set(net.quota) - expected)
            if missing:
                problems.append(f"missing quota for: {', '.join(missing)}")
            if extra:
                problems.append(f"quota given for non-honest nodes: {', '.join(extra)}")
        for i in honest:
            q = net.quota.get(i)
            if q is None:
                continue
            if not (Fraction(1, 2) < q <= 1):
                problems.append(f"node {i}: quota {q} out of range (0.5, 1]")
            elif q < Fraction(3, 4):
                warnings.warn(
                    f"node {i}: quota {q} below the recommended [0.75, 1] range",
                    QuotaRangeWarning,
                    stacklevel=2,
                )
            b = net.byz_fraction.get(i)
            if b is None:
                continue
            if b < 0 or b >= 1:
                problems.append(f"node {i}: byzantine fraction {b} out of [0, 1)")
            else:
                if b > Fraction(1, 4):
                    warnings.warn(
                        f"node {i}: byzantine fraction {b} above the assumed 0.25 cap",
                        QuotaRangeWarning,
                        stacklevel=2,
                    )
                if q is not None and b > 1 - q:
                    warnings.warn(
                        f"node {i}: byzantine fraction {b} exceeds 1 - quota = {1 - q}",
                        QuotaRangeWarning,
                        stacklevel=2,
                    )
    return problems


def validate_network(net: Network) -> Network:
    """Return ``net`` unchanged if it is well-formed.

    Raises:
        NetworkValidationError: listing every violated invariant.
    """
    problems = network_violations(net)
    if problems:
        raise NetworkValidationError(problems)
    return net


def profile_violations(net: Network, profile: OpinionProfile) -> list[str]:
    """Check an opinion profile against ``net``'s honest/Byzantine split."""
    problems = []
    honest = set(net.honest)
    if set(profile.honest_opinions) != honest:
        problems.append("honest opinion domain differs from the honest node set")
    for i, v in profile.honest_opinions.items():
        if v not in (0, 1):
            problems.append(f"node {i}: opinion {v!r} not in {{0, 1}}")
    if set(profile.byzantine_reveals) != set(net.byzantine):
        problems.append("reveal domain differs from the Byzantine node set")
    for b, reveals in profile.byzantine_reveals.items():
        observers = {i for i in honest if b in net.trust.get(i, frozenset())}
        missing = observers - set(reveals)
        if missing:
            problems.append(
                f"byzantine node {b}: no reveal for trusting observers {', '.join(sorted(missing))}"
            )
        for o, v in reveals.items():
            if v not in (0, 1):
                problems.append(f"byzantine node {b}: reveal {v!r} to {o} not in {{0, 1}}")
    return problems


# ---------------------------------------------------------------------------
# Observation and validation of opinions


def observed_set(
    net: Network, profile: OpinionProfile, observer: NodeId, x: int
) -> frozenset[NodeId]:
    """Nodes in the observer's trust set seen holding ``x``.

    Honest trustees contribute their single opinion; Byzantine trustees
    contribute whatever they reveal to this specific observer, and are
    left out of both value classes if they reveal nothing to it.
    """
    if observer in net.byzantine:
        raise ValueError(f"observer {observer!r} is not honest")
    members = []
    for i in net.trust[observer]:
        if i in net.byzantine:
            if profile.byzantine_reveals.get(i, {}).get(observer) == x:
                members.append(i)
        elif profile.honest_opinions[i] == x:
            members.append(i)
    return frozenset(members)


def validates(net: Network, profile: OpinionProfile, i: NodeId, x: int) -> bool:
    """True when some winning coalition of ``i`` lies inside its observed set."""
    obs = observed_set(net, profile, i, x)
    if isinstance(net, QuotaNetwork):
        return len(obs) >= threshold(net, i)
    return any(s <= obs for s in net.slices[i])


# ---------------------------------------------------------------------------
# Coalition closure


def _selector_slice(net: Network, selector: Mapping[NodeId, Iterable[NodeId]], node: NodeId) -> frozenset:
    if node in net.byzantine:
        chosen = frozenset(selector.get(node, {node}))
        if chosen != frozenset({node}):
            raise ValueError(f"byzantine node {node} must select its own singleton")
        return chosen
    try:
        chosen = frozenset(selector[node])
    except KeyError:
        raise ValueError(f"selector is missing honest node {node}") from None
    if isinstance(net, QuotaNetwork):
        if not chosen <= net.trust[node] or len(chosen) < threshold(net, node):
            raise ValueError(f"selector picks a non-slice for node {node}")
    elif chosen not in net.slices[node]:
        raise ValueError(f"selector picks a non-slice for node {node}")
    return chosen


def closure_step(
    net: Network,
    selector: Mapping[NodeId, Iterable[NodeId]],
    seed: Iterable[NodeId],
) -> frozenset[NodeId]:
    """One application of the coalition-closure operator.

    Returns the union, over every node in ``seed``, of the winning
    coalition the selector picked for it. Iterating from any seed reaches
    a fixpoint in at most ``len(net.nodes)`` steps.
    """
    result: set[NodeId] = set()
    for node in seed:
        result |= _selector_slice(net, selector, node)
    return frozenset(result)


def closure_fixpoint(
    net: Network,
    selector: Mapping[NodeId, Iterable[NodeId]],
    seed: Iterable[NodeId],
) -> frozenset[NodeId]:
    """Union of all iterates of :func:`closure_step` starting from ``seed``.

    The iterate sequence is eventually periodic, so the union is taken
    until the current set repeats.
    """
    seen: set[frozenset] = set()
    current = frozenset(seed)
    union: set[NodeId] = set()
    while current not in seen:
        seen.add(current)
        current = closure_step(net, selector, current)
        union |= current
    return frozenset(union)


# ---------------------------------------------------------------------------
# Fork search


def _budget_check(net: Network, max_nodes: int, max_total_slices: int | None) -> None:
    if len(net.nodes) > max_nodes:
        raise BudgetExceededError(
            f"{len(net.nodes)} nodes exceeds the search budget of {max_nodes}"
        )
    if max_total_slices is not None and isinstance(net, TrustNetwork):
        total = sum(len(f) for f in net.slices.values())
        if total > max_total_slices:
            raise BudgetExceededError(
                f"{total} slices exceeds the search budget of {max_total_slices}"
            )


def _fork_profile(
    net: Network,
    side_a: frozenset[NodeId],
    side_b: frozenset[NodeId],
    node_a: NodeId,
    node_b: NodeId,
) -> OpinionProfile:
    """Profile realizing a fork: side_a agrees on 1, side_b on 0, filler 0.

    Byzantine members of side_a reveal 1 to node_a and those of side_b
    reveal 0 to node_b; every other trusting observer is shown its own
    value, which keeps the profile total without disturbing either side.
    """
    opinions = {}
    for i in net.honest:
        opinions[i] = 1 if i in side_a else 0
    reveals: dict[NodeId, dict[NodeId, int]] = {}
    for b in net.byzantine:
        shown: dict[NodeId, int] = {}
        for o in net.honest:
            if b not in net.trust[o]:
                continue
            shown[o] = opinions[o]
        if b in side_a:
            shown[node_a] = 1
        if b in side_b:
            shown[node_b] = 0
        reveals[b] = shown
    return OpinionProfile(opinions, reveals)


def _quota_fork_sides(
    net: QuotaNetwork, i: NodeId, j: NodeId
) -> tuple[frozenset, frozenset] | None:
    """Disjoint-on-honest coalition pair (C for i at 1, C' for j at 0), if any.

    Shared honest trustees must be split between the sides; a split with
    ``x`` of them on i's side works iff both thresholds survive. Byzantine
    trustees count for both sides since they reveal per observer.
    """
    t_i, t_j = net.trust[i], net.trust[j]
    shared_honest = [n for n in net.nodes if n in t_i and n in t_j and n not in net.byzantine]
    s = len(shared_honest)
    need_i, need_j = threshold(net, i), threshold(net, j)
    lo = max(0, need_i - (len(t_i) - s))
    hi = min(s, len(t_j) - need_j)
    if lo > hi:
        return None
    taken = frozenset(shared_honest[:lo])
    side_a = (t_i - frozenset(shared_honest)) | taken
    side_b = t_j - taken
    return side_a, side_b


def find_fork(
    net: Network,
    *,
    max_nodes: int = DEFAULT_FORK_MAX_NODES,
    max_total_slices: int | None = DEFAULT_FORK_MAX_SLICES,
) -> ForkWitness | None:
    """Exact search for a forked profile; ``None`` means the network is safe.

    A fork between honest ``i`` and ``j`` (possibly the same node) exists
    exactly when coalitions C of i and C' of j share no honest node: the
    returned profile gives honest members of C opinion 1, honest members
    of C' opinion 0, filler 0 elsewhere, and dual reveals for Byzantine
    nodes in both coalitions.

    Raises:
        BudgetExceededError: when the instance exceeds the exact-search budget.
    """
    _budget_check(net, max_nodes, max_total_slices)
    honest = net.honest
    byz = net.byzantine
    if isinstance(net, QuotaNetwork):
        # A single node can never validate both values under q > 0.5: the
        # two observed sets are disjoint yet would each need more than
        # half the trust set. Only distinct pairs can fork.
        for i in honest:
            for j in honest:
                if i == j:
                    continue
                sides = _quota_fork_sides(net, i, j)
                if sides is None:
                    continue
                side_a, side_b = sides
                profile = _fork_profile(net, side_a, side_b, i, j)
                return ForkWitness(i, j, 1, 0, profile, "fork", side_a, side_b)
        return None
    for i in honest:
        for j in honest:
            for c_a in net.slices[i]:
                for c_b in net.slices[j]:
                    overlap = c_a & c_b
                    if i == j:
                        # One observer sees each trustee hold one value, so
                        # even Byzantine members cannot serve both sides.
                        if overlap:
                            continue
                    elif any(n not in byz for n in overlap):
                        continue
                    profile = _fork_profile(net, c_a, c_b, i, j)
                    return ForkWitness(i, j, 1, 0, profile, "fork", c_a, c_b)
    return None


def find_strong_fork(
    net: TrustNetwork,
    *,
    max_nodes: int = DEFAULT_STRONG_FORK_MAX_NODES,
) -> ForkWitness | None:
    """Search for a strong fork; ``None`` means the network is weakly safe.

    A strong fork is a fork whose two sides support themselves all the way
    down: every member of each side's coalition closure again finds an
    agreeing coalition inside it. That happens exactly when two quora,
    each containing an honest node, intersect in no honest node, so the
    search reuses the honest quorum-intersection check. The witness
    carries the two quora and a profile in which each quorum's honest
    members agree internally.

    Note that a network whose honest nodes hold singleton veto slices is
    strongly forked as soon as it has two honest nodes: each singleton is
    a self-supporting quorum of its own. The interesting verdicts come
    from networks where every coalition merely contains its owner.
    """
    if not isinstance(net, TrustNetwork):
        raise TypeError("strong-fork search expects an explicit-slice network")
    from .quorum import check_qi_honest

    report = check_qi_honest(net, max_nodes=max_nodes)
    if report.holds:
        return None
    q_a, q_b = report.witness
    node_a = next(n for n in net.nodes if n in q_a and n not in net.byzantine)
    node_b = next(n for n in net.nodes if n in q_b and n not in net.byzantine)

    opinions = {i: 1 if i in q_a else 0 for i in net.honest}
    reveals: dict[NodeId, dict[NodeId, int]] = {}
    for b in net.byzantine:
        shown: dict[NodeId, int] = {}
        for o in net.honest:
            if b not in net.trust[o]:
                continue
            if b in q_a and o in q_a:
                shown[o] = 1
            elif b in q_b and o in q_b:
                shown[o] = 0
            else:
                shown[o] = opinions[o]
        reveals[b] = shown
    profile = OpinionProfile(opinions, reveals)
    return ForkWitness(node_a, node_b, 1, 0, profile, "strong-fork", q_a, q_b)


# ---------------------------------------------------------------------------
# Desk-scale enumeration helpers


def enumerate_profiles(net: Network) -> Iterator[OpinionProfile]:
    """Yield every opinion profile of ``net``.

    Byzantine reveal maps range over all assignments to the honest
    observers that trust the node. Exponential; intended for small
    instances and test oracles.
    """
    honest = net.honest
    byz = sorted(net.byzantine)
    observer_lists = [
        [o for o in honest if b in net.trust[o]] for b in byz
    ]
    for bits in itertools.product((0, 1), repeat=len(honest)):
        opinions = dict(zip(honest, bits))
        reveal_choices = [
            itertools.product((0, 1), repeat=len(obs)) for obs in observer_lists
        ]
        for combo in itertools.product(*reveal_choices):
            reveals = {
                b: dict(zip(obs, vals))
                for b, obs, vals in zip(byz, observer_lists, combo)
            }
            yield OpinionProfile(opinions, reveals)


def enumerate_selectors(net: TrustNetwork) -> Iterator[dict[NodeId, frozenset]]:
    """Yield every slice-selector function of an explicit-slice network."""
    if not isinstance(net, TrustNetwork):
        raise TypeError("selector enumeration expects an explicit-slice network")
    honest = net.honest
    for combo in itertools.product(*(net.slices[i] for i in honest)):
        selector = dict(zip(honest, combo))
        for b in net.byzantine:
            selector[b] = frozenset({b})
        yield selector


def with_veto_slices(net: TrustNetwork) -> TrustNetwork:
    """Copy of ``net`` with each honest node's singleton added to its slices."""
    slices = {}
    trust = {}
    for i in net.honest:
        veto = frozenset({i})
        family = net.slices[i]
        slices[i] = family if veto in family else family + (veto,)
        trust[i] = net.trust[i] | {i}
    return TrustNetwork(net.nodes, net.byzantine, trust, slices, vetoed=True)
