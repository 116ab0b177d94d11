"""Elementary vertical swaps and the cascade enumerator.

A forward swap contracts a vertical (-1)-curve A meeting exactly one
(-2)-component C of the boundary (and at most one further boundary
component G, all normally): C leaves the boundary and becomes the new
vertical (-1)-curve, G drops one weight.  A reverse swap blows up the
intersection of A with one of its boundary attachments.

The cascade enumerator closes a vertically primitive root under reverse
swaps, keeping the children that stay admissible and satisfy the width
inequality, and deduplicating by canonical form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from delpezzo3.boundary import (
    DecoratedType,
    Entry,
    canonical_form,
    chain_comp,
    delpezzo_check_width,
    fork_comp,
)


class SwapError(ValueError):
    pass


# -- graph form --------------------------------------------------------------


def to_graph(d: DecoratedType):
    entries: list[Entry] = []
    edges: set = set()
    for comp in d.components:
        if comp[0] == "chain":
            base = len(entries)
            entries.extend(comp[1])
            for i in range(len(comp[1]) - 1):
                edges.add(frozenset((base + i, base + i + 1)))
        else:
            b = len(entries)
            entries.append(comp[1])
            for twig in comp[2]:
                first = len(entries)
                entries.extend(twig)
                # the twig's LAST entry meets the branch
                edges.add(frozenset((b, first + len(twig) - 1)))
                for i in range(len(twig) - 1):
                    edges.add(frozenset((first + i, first + i + 1)))
    return entries, edges


def from_graph(entries, edges, width, char_tag, free_labels) -> DecoratedType:
    n = len(entries)
    adj = {i: [] for i in range(n)}
    for e in edges:
        a, b = tuple(e)
        adj[a].append(b)
        adj[b].append(a)
    seen: set = set()
    components = []
    for start in range(n):
        if start in seen:
            continue
        comp = [start]
        stack = [start]
        seen.add(start)
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    comp.append(nxt)
                    stack.append(nxt)
        branch = [i for i in comp if len(adj[i]) >= 3]
        if not branch:
            tips = [i for i in comp if len(adj[i]) <= 1]
            if len(comp) == 1:
                components.append(chain_comp([entries[comp[0]]]))
                continue
            if len(tips) != 2:
                raise SwapError("boundary acquired a circular component")
            order = [min(tips)]
            prev = None
            while len(order) < len(comp):
                nxts = [i for i in adj[order[-1]] if i != prev]
                if not nxts:
                    raise SwapError("disconnected chain data")
                prev = order[-1]
                order.append(nxts[0])
            components.append(chain_comp([entries[i] for i in order]))
        elif len(branch) == 1 and len(adj[branch[0]]) == 3:
            b = branch[0]
            twigs = []
            for first in sorted(adj[b]):
                twig = [first]
                prev = b
                while True:
                    nxts = [i for i in adj[twig[-1]] if i != prev]
                    if len(nxts) > 1:
                        raise SwapError("boundary component is not a fork")
                    if not nxts:
                        break
                    prev = twig[-1]
                    twig.append(nxts[0])
                twigs.append(tuple(entries[i] for i in reversed(twig)))
            components.append(fork_comp(entries[b], twigs))
        else:
            raise SwapError("boundary component is not a chain or fork")
    return DecoratedType(tuple(components), width, char_tag, frozenset(free_labels))


def _attachments(entries, label):
    out = []
    for i, e in enumerate(entries):
        k = e.labels.count(label)
        if k:
            out.append((i, k))
    return out


def _strip_label(e: Entry, label: int) -> Entry:
    return Entry(e.weight, e.horizontal, e.two_section,
                 tuple(l for l in e.labels if l != label))


def _add_label(e: Entry, label: int) -> Entry:
    return Entry(e.weight, e.horizontal, e.two_section, e.labels + (label,))


def _node_pair(edges, attachments) -> bool:
    idx = [i for i, _ in attachments]
    return any(frozenset((a, b)) in edges for a, b in itertools.combinations(idx, 2))


def adjacent_attachment_labels(d: DecoratedType) -> frozenset:
    """Labels attached to two adjacent boundary entries.  Such a curve
    either passes through a node of the boundary or closes a triangle
    with it; the decorated data cannot tell the two apart, so the node
    curves of the primitive models are recorded explicitly."""
    entries, edges = to_graph(d)
    out = set()
    for label in d.labels():
        if _node_pair(edges, _attachments(entries, label)):
            out.add(label)
    return frozenset(out)


# -- the swaps ---------------------------------------------------------------


def forward_swap(d: DecoratedType, label: int,
                 excluded_labels: frozenset = frozenset()) -> DecoratedType:
    """Contract the vertical (-1)-curve with the given label."""
    if label in excluded_labels:
        raise SwapError(f"label {label} meets the boundary in a node")
    entries, edges = to_graph(d)
    att = _attachments(entries, label)
    if not att:
        raise SwapError(f"label {label} has no boundary attachment")
    if any(k > 1 for _, k in att):
        raise SwapError("the curve meets a boundary component twice")
    if sum(k for _, k in att) > 2:
        raise SwapError("the curve meets the boundary more than twice")
    minus_two = [
        i for i, _ in att if entries[i].weight == 2 and not entries[i].horizontal
    ]
    if len(minus_two) != 1:
        raise SwapError("no unique non-horizontal (-2)-attachment")
    c = minus_two[0]
    others = [i for i, _ in att if i != c]
    g = others[0] if others else None
    neighbors = [j for e in edges if c in e for j in e if j != c]

    new_entries = []
    remap = {}
    for i, e in enumerate(entries):
        if i == c:
            continue
        remap[i] = len(new_entries)
        e = _strip_label(e, label)
        if i == g:
            if e.weight - 1 < 2:
                raise SwapError("contraction would push a boundary weight below 2")
            e = Entry(e.weight - 1, e.horizontal, e.two_section, e.labels)
        if i in neighbors or i == g:
            e = _add_label(e, label)
        new_entries.append(e)
    new_edges = {
        frozenset((remap[a], remap[b]))
        for a, b in (tuple(e) for e in edges)
        if a != c and b != c
    }
    free = set(d.free_labels)
    if g is None and not neighbors:
        free.add(label)
    return from_graph(new_entries, new_edges, d.width, d.char_tag, free)


def reverse_swap(d: DecoratedType, label: int, target: int,
                 excluded_labels: frozenset = frozenset()) -> DecoratedType:
    """Blow up the intersection of the labeled (-1)-curve with the
    boundary entry at graph index ``target``."""
    if label in excluded_labels:
        raise SwapError(f"label {label} meets the boundary in a node")
    entries, edges = to_graph(d)
    att = _attachments(entries, label)
    idx = {i for i, _ in att}
    if target not in idx:
        raise SwapError(f"entry {target} is not an attachment of label {label}")
    if any(k > 1 for _, k in att):
        raise SwapError("the curve meets a boundary component twice")
    new_entries = []
    for i, e in enumerate(entries):
        if i == target:
            new_entries.append(
                Entry(e.weight + 1, e.horizontal, e.two_section, e.labels)
            )
        elif i in idx:
            new_entries.append(_strip_label(e, label))
        else:
            new_entries.append(e)
    c_index = len(new_entries)
    new_entries.append(Entry(2, labels=(label,)))
    new_edges = set(edges)
    for i in idx:
        if i != target:
            new_edges.add(frozenset((i, c_index)))
    return from_graph(new_entries, new_edges, d.width, d.char_tag, d.free_labels)


def legal_forward_labels(d: DecoratedType,
                         excluded_labels: frozenset = frozenset()) -> list[int]:
    out = []
    for label in sorted(d.labels()):
        try:
            forward_swap(d, label, excluded_labels)
        except SwapError:
            continue
        out.append(label)
    return out


def is_vertically_primitive(d: DecoratedType,
                            excluded_labels: frozenset = frozenset()) -> bool:
    return not legal_forward_labels(d, excluded_labels)


def reverse_moves(d: DecoratedType,
                  excluded_labels: frozenset = frozenset()) -> list[tuple[int, int]]:
    """All (label, target index) pairs that admit a reverse swap."""
    entries, edges = to_graph(d)
    moves = []
    for label in sorted(d.labels()):
        if label in excluded_labels:
            continue
        att = _attachments(entries, label)
        if any(k > 1 for _, k in att):
            continue
        for i, _ in att:
            moves.append((label, i))
    return moves


# -- cascade -----------------------------------------------------------------


@dataclass(frozen=True)
class CascadeNode:
    dtype: DecoratedType
    depth: int
    parent: bytes | None
    move: tuple[int, int] | None
    status: str  # "ok" | "inadmissible" | "inequality" | "invalid"
    lhs: Fraction | None


@dataclass
class CascadeResult:
    nodes: dict  # canonical_form -> CascadeNode
    pruned: dict  # canonical_form -> CascadeNode

    def ok_nodes(self) -> list[CascadeNode]:
        return [self.nodes[k] for k in sorted(self.nodes)]

    def pruned_nodes(self) -> list[CascadeNode]:
        return [self.pruned[k] for k in sorted(self.pruned)]


def graph_lds(entries, edges) -> list[Fraction]:
    """Log discrepancy of every graph node, indexed like ``entries``."""
    d = from_graph(entries, edges, None, "any", frozenset())
    # rebuild the index correspondence: from_graph walks components in
    # order of their smallest node index and lays twigs out |branch|twig1..
    n = len(entries)
    adj = {i: [] for i in range(n)}
    for e in edges:
        a, b = tuple(e)
        adj[a].append(b)
        adj[b].append(a)
    lds: dict[int, Fraction] = {}
    seen: set = set()
    comp_iter = iter(d.components)
    for start in range(n):
        if start in seen:
            continue
        nodes = [start]
        stack = [start]
        seen.add(start)
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    nodes.append(nxt)
                    stack.append(nxt)
        comp = next(comp_iter)
        ordered = _graph_order(nodes, adj)
        if comp[0] == "chain":
            values = [d.ld(d.components.index(comp), j)
                      for j in range(1, len(comp[1]) + 1)]
            seq = [e for e in comp[1]]
            if [entries[i] for i in ordered] != seq:
                ordered = list(reversed(ordered))
            for i, v in zip(ordered, values):
                lds[i] = v
        else:
            ci = d.components.index(comp)
            b = [i for i in nodes if len([x for x in adj[i] if x in nodes]) == 3][0]
            lds[b] = d.ld(ci, "branch")
            used_twigs = set()
            for first in sorted(adj[b]):
                walk = [first]
                prev = b
                while True:
                    nxts = [x for x in adj[walk[-1]] if x != prev]
                    if not nxts:
                        break
                    prev = walk[-1]
                    walk.append(nxts[0])
                tipfirst = list(reversed(walk))
                shape = tuple(entries[i] for i in tipfirst)
                for ti, t in enumerate(comp[2], start=1):
                    if ti in used_twigs or t != shape:
                        continue
                    used_twigs.add(ti)
                    for j, i in enumerate(tipfirst, start=1):
                        lds[i] = d.ld(ci, (ti, j))
                    break
    return [lds[i] for i in range(n)]


def _graph_order(nodes, adj):
    inside = set(nodes)
    degree = {i: len([x for x in adj[i] if x in inside]) for i in nodes}
    tips = [i for i in nodes if degree[i] <= 1]
    if len(nodes) == 1:
        return list(nodes)
    order = [min(tips)]
    prev = None
    while len(order) < len(nodes):
        nxts = [x for x in adj[order[-1]] if x in inside and x != prev]
        if not nxts:
            return list(nodes)
        prev = order[-1]
        order.append(nxts[0])
    return order


def _check_monotone(child: DecoratedType, parent: DecoratedType, move) -> None:
    """Log discrepancies do not decrease under the forward swap
    from child back to parent.  The reverse swap keeps every parent entry
    at its graph index and appends the new (-2)-curve, so indices match."""
    label, target = move
    p_entries, p_edges = to_graph(parent)
    att = {i for i, _ in _attachments(p_entries, label)}
    c_index = len(p_entries)
    child_entries = []
    for i, e in enumerate(p_entries):
        if i == target:
            child_entries.append(Entry(e.weight + 1, e.horizontal, e.two_section, e.labels))
        elif i in att:
            child_entries.append(_strip_label(e, label))
        else:
            child_entries.append(e)
    child_entries.append(Entry(2, labels=(label,)))
    child_edges = set(p_edges)
    for i in att:
        if i != target:
            child_edges.add(frozenset((i, c_index)))
    parent_lds = graph_lds(p_entries, p_edges)
    child_lds = graph_lds(child_entries, child_edges)
    for i in range(len(p_entries)):
        if child_lds[i] > parent_lds[i]:
            raise AssertionError(
                f"log discrepancy decreased under forward swap {move}"
            )


def _expand_parent(args):
    """Generate and classify all reverse-swap children of one parent."""
    parent_key, parent, check_monotone, excluded = args
    out = []
    for move in reverse_moves(parent, excluded):
        try:
            child = reverse_swap(parent, *move, excluded_labels=excluded)
        except SwapError:
            continue
        key = canonical_form(child)
        if not child.is_admissible():
            out.append((key, parent_key, move, "inadmissible", None, child))
            continue
        res = delpezzo_check_width(child)
        if not res.satisfied:
            out.append((key, parent_key, move, "inequality", res.lhs, child))
            continue
        if check_monotone:
            _check_monotone(child, parent, move)
        out.append((key, parent_key, move, "ok", res.lhs, child))
    return out


def cascade(
    root: DecoratedType,
    max_depth: int,
    check_monotone: bool = False,
    jobs: int = 1,
    excluded_labels: frozenset = frozenset(),
) -> CascadeResult:
    """Breadth-first closure of the root under reverse swaps.

    Children that stay admissible and satisfy the width inequality are
    expanded; the others are recorded with their failure and pruned
    (sound by the weighted-subgraph monotonicity of log discrepancies).
    The result is independent of ``jobs``: per-level expansions merge in
    frontier order and deduplicate by canonical form.
    """
    root_check = delpezzo_check_width(root)
    if not root.is_admissible() or not root_check.satisfied:
        raise SwapError("cascade root must be admissible and satisfy the inequality")
    root_key = canonical_form(root)
    nodes = {root_key: CascadeNode(root, 0, None, None, "ok", root_check.lhs)}
    pruned: dict = {}
    frontier = [(root_key, root)]
    depth = 0
    pool = None
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        pool = ProcessPoolExecutor(max_workers=jobs)
    try:
        while frontier and depth < max_depth:
            depth += 1
            tasks = [(k, p, check_monotone, excluded_labels) for k, p in frontier]
            if pool is not None:
                batches = list(pool.map(_expand_parent, tasks, chunksize=8))
            else:
                batches = [_expand_parent(t) for t in tasks]
            next_frontier = []
            for batch in batches:
                for key, parent_key, move, status, lhs, child in batch:
                    if key in nodes or key in pruned:
                        continue
                    node = CascadeNode(child, depth, parent_key, move, status, lhs)
                    if status == "ok":
                        nodes[key] = node
                        next_frontier.append((key, child))
                    else:
                        pruned[key] = node
            next_frontier.sort(key=lambda kv: kv[0])
            frontier = next_frontier
    finally:
        if pool is not None:
            pool.shutdown()
    return CascadeResult(nodes, pruned)
