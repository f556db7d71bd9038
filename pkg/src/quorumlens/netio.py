"""Reading and writing the network JSON interchange format.

One network per file. Top-level keys:

* ``nodes``: array of unique string labels (required).
* ``byzantine``: array of labels, default empty.
* ``kind``: ``"slices"`` or ``"quota"`` (required).
* slices kind: ``slices`` maps each honest label to an array of arrays of
  labels; a node's trust set is the union of its slices.
* quota kind: ``trust`` maps each honest label to an array of labels,
  plus exactly one of ``quota_uniform`` (number) or ``quota`` (object
  label to number); optionally one of ``byz_fraction_uniform`` or
  ``byz_fraction`` in the same two shapes.
* ``vetoed``: boolean, default false.
* ``slice_addition``: optional generator metadata, an object with
  ``node`` and ``slice`` describing a candidate slice to add.

Unknown keys are rejected, every referenced label must appear in
``nodes``, and the parsed network must pass full validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .network import (
    Network,
    NodeId,
    QuotaNetwork,
    TrustNetwork,
    as_fraction,
    validate_network,
)


class NetworkFormatError(ValueError):
    """The document does not match the network file schema."""


_TOP_KEYS = {
    "nodes",
    "byzantine",
    "kind",
    "slices",
    "trust",
    "quota",
    "quota_uniform",
    "byz_fraction",
    "byz_fraction_uniform",
    "vetoed",
    "slice_addition",
}


@dataclass(frozen=True)
class LoadedNetwork:
    """A parsed network file: the network plus optional generator metadata."""

    network: Network
    slice_addition: tuple[NodeId, frozenset[NodeId]] | None = None


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise NetworkFormatError(message)


def _label_list(value, key: str, known: set[str] | None = None) -> list[str]:
    _expect(isinstance(value, list), f"key {key!r}: expected an array of labels")
    for x in value:
        _expect(isinstance(x, str) and x, f"key {key!r}: label {x!r} is not a non-empty string")
        if known is not None:
            _expect(x in known, f"key {key!r}: label {x!r} does not appear in \"nodes\"")
    return list(value)


def _number(value, key: str) -> Fraction:
    _expect(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"key {key!r}: expected a number",
    )
    return as_fraction(value)


def parse_network_document(doc) -> LoadedNetwork:
    """Build a validated network from a decoded JSON document."""
    _expect(isinstance(doc, dict), "top level must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    _expect(not unknown, f"unknown keys: {', '.join(unknown)}")
    for key in ("nodes", "kind"):
        _expect(key in doc, f"missing required key {key!r}")

    nodes = _label_list(doc["nodes"], "nodes")
    _expect(len(set(nodes)) == len(nodes), 'duplicate labels in "nodes"')
    node_set = set(nodes)
    byzantine = frozenset(_label_list(doc.get("byzantine", []), "byzantine", node_set))
    honest = [x for x in nodes if x not in byzantine]
    kind = doc["kind"]
    _expect(kind in ("slices", "quota"), f'key "kind": {kind!r} is not "slices" or "quota"')
    vetoed = doc.get("vetoed", False)
    _expect(isinstance(vetoed, bool), 'key "vetoed": expected a boolean')

    if kind == "slices":
        for forbidden in ("trust", "quota", "quota_uniform", "byz_fraction", "byz_fraction_uniform"):
            _expect(forbidden not in doc, f"key {forbidden!r} does not belong to a slices network")
        _expect("slices" in doc, 'missing required key "slices"')
        raw = doc["slices"]
        _expect(isinstance(raw, dict), 'key "slices": expected an object')
        _expect(
            set(raw) == set(honest),
            'key "slices": domain must be exactly the honest nodes',
        )
        slices = {}
        trust = {}
        for label in honest:
            families = raw[label]
            _expect(isinstance(families, list) and families, f"slices[{label!r}]: expected a non-empty array")
            parsed = []
            union: set[str] = set()
            for k, coalition in enumerate(families):
                members = frozenset(_label_list(coalition, f"slices[{label!r}][{k}]", node_set))
                _expect(bool(members), f"slices[{label!r}][{k}]: empty coalition")
                parsed.append(members)
                union |= members
            slices[label] = tuple(parsed)
            trust[label] = frozenset(union)
        net: Network = TrustNetwork(tuple(nodes), byzantine, trust, slices, vetoed)
    else:
        _expect("slices" not in doc, 'key "slices" does not belong to a quota network')
        _expect("trust" in doc, 'missing required key "trust"')
        raw = doc["trust"]
        _expect(isinstance(raw, dict), 'key "trust": expected an object')
        _expect(set(raw) == set(honest), 'key "trust": domain must be exactly the honest nodes')
        trust = {
            label: frozenset(_label_list(raw[label], f"trust[{label!r}]", node_set))
            for label in honest
        }
        _expect(
            ("quota_uniform" in doc) != ("quota" in doc),
            'exactly one of "quota_uniform" or "quota" is required',
        )
        if "quota_uniform" in doc:
            q = _number(doc["quota_uniform"], "quota_uniform")
            quota = {label: q for label in honest}
        else:
            raw_q = doc["quota"]
            _expect(isinstance(raw_q, dict), 'key "quota": expected an object')
            _expect(set(raw_q) == set(honest), 'key "quota": domain must be exactly the honest nodes')
            quota = {label: _number(v, f"quota[{label!r}]") for label, v in raw_q.items()}
        _expect(
            not ("byz_fraction_uniform" in doc and "byz_fraction" in doc),
            'at most one of "byz_fraction_uniform" or "byz_fraction" is allowed',
        )
        byz_fraction = {}
        if "byz_fraction_uniform" in doc:
            b = _number(doc["byz_fraction_uniform"], "byz_fraction_uniform")
            byz_fraction = {label: b for label in honest}
        elif "byz_fraction" in doc:
            raw_b = doc["byz_fraction"]
            _expect(isinstance(raw_b, dict), 'key "byz_fraction": expected an object')
            _expect(
                set(raw_b) <= set(honest),
                'key "byz_fraction": domain must be honest nodes',
            )
            byz_fraction = {label: _number(v, f"byz_fraction[{label!r}]") for label, v in raw_b.items()}
        net = QuotaNetwork(tuple(nodes), byzantine, trust, quota, byz_fraction)
        if vetoed and not net.vetoed:
            raise NetworkFormatError(
                'key "vetoed": quota network does not induce veto slices (thresholds above 1)'
            )

    addition = None
    if "slice_addition" in doc:
        _expect(kind == "slices", 'key "slice_addition" requires a slices network')
        meta = doc["slice_addition"]
        _expect(isinstance(meta, dict), 'key "slice_addition": expected an object')
        _expect(
            set(meta) == {"node", "slice"},
            'key "slice_addition": expected exactly the keys "node" and "slice"',
        )
        target = meta["node"]
        _expect(
            isinstance(target, str) and target in node_set,
            'key "slice_addition": "node" must name a declared node',
        )
        members = frozenset(_label_list(meta["slice"], 'slice_addition "slice"', node_set))
        _expect(bool(members), 'key "slice_addition": empty slice')
        addition = (target, members)

    validate_network(net)
    return LoadedNetwork(net, addition)


def load_network_file(path) -> LoadedNetwork:
    """Parse and validate a network file, keeping generator metadata."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON: {exc}") from exc
    return parse_network_document(doc)


def load_network(path) -> Network:
    """Parse and validate a network file; quota networks stay in quota form."""
    return load_network_file(path).network


def network_document(
    net: Network, slice_addition: tuple[NodeId, frozenset[NodeId]] | None = None
) -> dict:
    """JSON-ready document for ``net`` (inverse of :func:`parse_network_document`)."""
    order = {n: k for k, n in enumerate(net.nodes)}

    def ordered(sets) -> list[str]:
        return sorted(sets, key=order.get)

    doc: dict = {"nodes": list(net.nodes)}
    if net.byzantine:
        doc["byzantine"] = ordered(net.byzantine)
    if isinstance(net, TrustNetwork):
        doc["kind"] = "slices"
        doc["slices"] = {
            i: [ordered(s) for s in net.slices[i]] for i in net.honest
        }
        if net.vetoed:
            doc["vetoed"] = True
    else:
        doc["kind"] = "quota"
        doc["trust"] = {i: ordered(net.trust[i]) for i in net.honest}
        quotas = {net.quota[i] for i in net.honest}
        if len(quotas) == 1:
            doc["quota_uniform"] = float(next(iter(quotas)))
        else:
            doc["quota"] = {i: float(net.quota[i]) for i in net.honest}
        defaults = all(net.byz_fraction[i] == 1 - net.quota[i] for i in net.honest)
        if not defaults:
            fractions = {net.byz_fraction[i] for i in net.honest}
            if len(fractions) == 1:
                doc["byz_fraction_uniform"] = float(next(iter(fractions)))
            else:
                doc["byz_fraction"] = {i: float(net.byz_fraction[i]) for i in net.honest}
    if slice_addition is not None:
        node, members = slice_addition
        doc["slice_addition"] = {"node": node, "slice": ordered(members)}
    return doc


def save_network(
    net: Network,
    path,
    *,
    slice_addition: tuple[NodeId, frozenset[NodeId]] | None = None,
) -> None:
    """Write ``net`` to ``path`` in the interchange format."""
    doc = network_document(net, slice_addition)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
