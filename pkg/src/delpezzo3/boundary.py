"""Decorated boundary graphs and the ampleness criterion.

A :class:`DecoratedType` is a disjoint union of weighted chains and forks
whose entries carry fibration decorations: horizontal marks (bold numbers
in the usual notation), the 2-section mark (underline), and labels of the
vertical (-1)-curves meeting that component.  A label occurring twice on
one entry means the (-1)-curve meets it in a node (contact 2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from delpezzo3.chains import (
    Fork,
    discriminant,
    is_admissible,
    is_log_canonical_fork,
    ld_chain,
    ld_fork,
)

CHAR_TAGS = ("any", "ne2", "eq2", "ne23", "eq3")


@dataclass(frozen=True)
class Entry:
    """One boundary component: a weight with its decorations."""

    weight: int
    horizontal: bool = False
    two_section: bool = False
    labels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.two_section and not self.horizontal:
            raise ValueError("the 2-section mark implies the horizontal mark")
        object.__setattr__(self, "labels", tuple(sorted(self.labels)))
        if any(self.labels.count(l) > 2 for l in self.labels):
            raise ValueError("a (-1)-curve meets a component at most twice")

    def skeleton(self) -> tuple:
        """Label-name-free data used by canonical forms."""
        mults = tuple(sorted(self.labels.count(l) for l in sorted(set(self.labels))))
        return (self.weight, self.horizontal, self.two_section, mults)


Component = tuple  # ("chain", entries) | ("fork", branch, (t1, t2, t3))


def chain_comp(entries) -> Component:
    return ("chain", tuple(entries))


def fork_comp(branch: Entry, twigs) -> Component:
    twigs = tuple(tuple(t) for t in twigs)
    if len(twigs) != 3 or any(not t for t in twigs):
        raise ValueError("a fork needs three nonempty twigs")
    return ("fork", branch, twigs)


def comp_entries(comp: Component) -> list[Entry]:
    if comp[0] == "chain":
        return list(comp[1])
    return [comp[1]] + [e for t in comp[2] for e in t]


def comp_weights(comp: Component):
    """Undecorated shape: a weight tuple or a chains.Fork."""
    if comp[0] == "chain":
        return tuple(e.weight for e in comp[1])
    return Fork(
        comp[1].weight, tuple(tuple(e.weight for e in t) for t in comp[2])
    )


@dataclass(frozen=True)
class DecoratedType:
    components: tuple[Component, ...]
    width: int | None = None
    char_tag: str = "any"
    free_labels: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.char_tag not in CHAR_TAGS:
            raise ValueError(f"unknown characteristic tag {self.char_tag!r}")
        for e in self.entries():
            if e.weight < 2:
                raise ValueError("boundary weights must be >= 2")
        two_sections = [e for e in self.entries() if e.two_section]
        horizontals = [e for e in self.entries() if e.horizontal]
        if self.width is not None:
            if len(horizontals) != self.width:
                raise ValueError(
                    f"width {self.width} needs {self.width} horizontal marks,"
                    f" found {len(horizontals)}"
                )
            if self.width == 2 and len(two_sections) != 1:
                raise ValueError("width 2 needs exactly one 2-section mark")
            if self.width != 2 and two_sections:
                raise ValueError("2-section marks only occur in width 2")
        for label, total in self.attachment_multiplicities().items():
            if total > 3:
                raise ValueError(f"(-1)-curve {label} meets the boundary {total} > 3 times")

    # -- basic accessors ---------------------------------------------------

    def entries(self) -> list[Entry]:
        return [e for c in self.components for e in comp_entries(c)]

    def labels(self) -> frozenset[int]:
        out = set(self.free_labels)
        for e in self.entries():
            out.update(e.labels)
        return frozenset(out)

    def attachment_multiplicities(self) -> dict[int, int]:
        out: dict[int, int] = {l: 0 for l in self.free_labels}
        for e in self.entries():
            for l in e.labels:
                out[l] = out.get(l, 0) + 1
        return out

    def horizontal_positions(self) -> list[tuple[int, object]]:
        """(component index, position) of each horizontal entry, where the
        position is a 1-based chain index, "branch", or (twig, index)."""
        out = []
        for ci, comp in enumerate(self.components):
            if comp[0] == "chain":
                for j, e in enumerate(comp[1], start=1):
                    if e.horizontal:
                        out.append((ci, j))
            else:
                if comp[1].horizontal:
                    out.append((ci, "branch"))
                for ti, twig in enumerate(comp[2], start=1):
                    for j, e in enumerate(twig, start=1):
                        if e.horizontal:
                            out.append((ci, (ti, j)))
        return out

    def entry_at(self, ci: int, pos) -> Entry:
        comp = self.components[ci]
        if comp[0] == "chain":
            return comp[1][pos - 1]
        if pos == "branch":
            return comp[1]
        ti, j = pos
        return comp[2][ti - 1][j - 1]

    def ld(self, ci: int, pos) -> Fraction:
        """Log discrepancy of the entry, within its connected component."""
        comp = self.components[ci]
        shape = comp_weights(comp)
        if comp[0] == "chain":
            return ld_chain(shape, pos)
        return ld_fork(shape, pos)

    def is_admissible(self) -> bool:
        return all(is_admissible(comp_weights(c)) for c in self.components)

    def is_log_canonical(self) -> bool:
        for c in self.components:
            shape = comp_weights(c)
            if isinstance(shape, Fork):
                if not is_log_canonical_fork(shape):
                    return False
            elif not is_admissible(shape):
                return False
        return True


@dataclass(frozen=True)
class CheckResult:
    satisfied: bool
    lhs: Fraction
    rhs: Fraction


def delpezzo_check_general(
    d: DecoratedType,
    fiber_degrees: list[int],
    fiber_dot_boundary: int,
) -> CheckResult:
    """The ampleness criterion: sum of ld(H_j) (H_j . F) > D . F - 2.

    ``fiber_degrees`` lists H_j . F for the horizontal entries in document
    order; log discrepancies are taken within each component.
    """
    positions = d.horizontal_positions()
    if len(fiber_degrees) != len(positions):
        raise ValueError(
            f"{len(positions)} horizontal components but {len(fiber_degrees)} degrees"
        )
    if not d.is_admissible():
        raise ValueError("log discrepancies undefined: non-admissible component")
    lhs = Fraction(0)
    for degree, (ci, pos) in zip(fiber_degrees, positions):
        lhs += d.ld(ci, pos) * degree
    rhs = Fraction(fiber_dot_boundary - 2)
    return CheckResult(lhs > rhs, lhs, rhs)


def delpezzo_check_width(d: DecoratedType) -> CheckResult:
    """Width-specific form of the criterion.

    Width 3: ld(H1)+ld(H2)+ld(H3) > 1; width 2: ld(H1)+2 ld(H2) > 1 with
    H2 the 2-section; width 1: ld(H) > 1/3.  The returned lhs/rhs follow
    these normalizations.
    """
    if d.width not in (1, 2, 3):
        raise ValueError("decorated type carries no usable width")
    positions = d.horizontal_positions()
    if not d.is_admissible():
        raise ValueError("log discrepancies undefined: non-admissible component")
    if d.width == 3:
        lhs = sum((d.ld(ci, pos) for ci, pos in positions), Fraction(0))
        rhs = Fraction(1)
    elif d.width == 2:
        lhs = Fraction(0)
        for ci, pos in positions:
            mult = 2 if d.entry_at(ci, pos).two_section else 1
            lhs += d.ld(ci, pos) * mult
        rhs = Fraction(1)
    else:
        (ci, pos), = positions
        lhs = d.ld(ci, pos)
        rhs = Fraction(1, 3)
    return CheckResult(lhs > rhs, lhs, rhs)


def singularity_type_of(d: DecoratedType) -> tuple:
    """The undecorated type: chains up to reversal, forks up to twig
    permutation, components sorted canonically."""
    out = []
    for comp in d.components:
        shape = comp_weights(comp)
        if isinstance(shape, Fork):
            twigs = tuple(sorted(shape.twigs, key=lambda t: (discriminant(t), t)))
            out.append(("fork", shape.branch, twigs))
        else:
            out.append(("chain", min(shape, tuple(reversed(shape)))))
    return tuple(sorted(out))


def render_singularity_type(sing: tuple) -> str:
    parts = []
    for comp in sing:
        if comp[0] == "chain":
            parts.append("[" + ",".join(str(w) for w in comp[1]) + "]")
        else:
            twigs = ",".join(
                "[" + ",".join(str(w) for w in t) + "]" for t in comp[2]
            )
            parts.append(f"<{comp[1]};{twigs}>")
    return "+".join(parts)


# ---------------------------------------------------------------------------
# Canonical forms and graph automorphisms.


def _chain_variants(comp: Component):
    entries = comp[1]
    yield ("chain",) + tuple(entries)
    if len(entries) > 1:
        yield ("chain",) + tuple(reversed(entries))


def _fork_variants(comp: Component):
    branch, twigs = comp[1], comp[2]
    for perm in itertools.permutations(range(3)):
        yield ("fork", branch, tuple(twigs[i] for i in perm))


def _variants(comp: Component):
    if comp[0] == "chain":
        yield from _chain_variants(comp)
    else:
        yield from _fork_variants(comp)


def _variant_entries(variant) -> list[Entry]:
    if variant[0] == "chain":
        return list(variant[1:])
    return [variant[1]] + [e for t in variant[2] for e in t]


def _variant_skeleton(variant) -> tuple:
    if variant[0] == "chain":
        shape: tuple = ("chain",)
    else:
        shape = ("fork", tuple(len(t) for t in variant[2]))
    entries = _variant_entries(variant)
    partition = {}
    local = []
    for e in entries:
        ids = []
        for l in e.labels:
            if l not in partition:
                partition[l] = len(partition)
            ids.append(partition[l])
        local.append((e.skeleton(), tuple(sorted(ids))))
    return shape + tuple(local)


def _canonical_variants(comp: Component):
    variants = list(_variants(comp))
    keyed = [(_variant_skeleton(v), v) for v in variants]
    best = min(k for k, _ in keyed)
    return best, [v for k, v in keyed if k == best]


def _encode_arrangement(ordered_variants, free_label_count: int):
    """Linearize an arrangement, renaming labels by first occurrence.

    Returns the minimal encoding over the (rare) tie-break choices when
    several fresh labels appear on a single entry.
    """
    best = [None]

    def rec(vi, rename, acc):
        if vi == len(ordered_variants):
            out = tuple(acc) + ("free", free_label_count)
            if best[0] is None or out < best[0]:
                best[0] = out
            return
        variant = ordered_variants[vi]
        entries = _variant_entries(variant)
        if variant[0] == "chain":
            head: tuple = ("chain", len(entries))
        else:
            head = ("fork", tuple(len(t) for t in variant[2]))

        def rec_entries(ei, rename, acc2):
            if ei == len(entries):
                rec(vi + 1, rename, acc2)
                return
            e = entries[ei]
            fresh = sorted({l for l in e.labels if l not in rename})
            for order in itertools.permutations(fresh):
                r2 = dict(rename)
                for l in order:
                    r2[l] = len(r2)
                enc = (e.weight, e.horizontal, e.two_section,
                       tuple(sorted(r2[l] for l in e.labels)))
                rec_entries(ei + 1, r2, acc2 + [enc])

        rec_entries(0, rename, acc + [head])

    rec(0, {}, [])
    return best[0]


def _arrangements(d: DecoratedType):
    canon = [_canonical_variants(c) for c in d.components]
    order = sorted(range(len(canon)), key=lambda i: canon[i][0])
    groups = []
    for _, grp in itertools.groupby(order, key=lambda i: canon[i][0]):
        groups.append(list(grp))
    for perm_choice in itertools.product(
        *(itertools.permutations(g) for g in groups)
    ):
        comp_order = [i for g in perm_choice for i in g]
        variant_lists = [canon[i][1] for i in comp_order]
        for variants in itertools.product(*variant_lists):
            yield comp_order, list(variants)


def canonical_form(d: DecoratedType) -> bytes:
    """Byte string equal for isomorphic decorated graphs: invariant under
    chain reversal, twig permutation, component reordering and any
    relabeling of the (-1)-curves; deterministic across runs."""
    best = None
    for _, variants in _arrangements(d):
        enc = _encode_arrangement(variants, len(d.free_labels))
        if best is None or enc < best:
            best = enc
    return repr(best).encode()


@dataclass(frozen=True)
class AutGroup:
    order: int
    permutations: tuple[tuple[int, ...], ...]


def graph_automorphisms(d: DecoratedType) -> AutGroup:
    """All self-isomorphisms in the sense of canonical_form equality.

    Returns the group order and the automorphisms as permutations of the
    boundary entries (in document order).
    """
    n = len(d.entries())
    offsets = []
    k = 0
    for c in d.components:
        offsets.append(k)
        k += len(comp_entries(c))

    def orientation_maps(src: Component, tgt: Component):
        """Component-local index maps src position -> tgt position that
        preserve the graph structure (ignoring label names)."""
        maps = []
        if src[0] == "chain" and tgt[0] == "chain":
            if len(src[1]) != len(tgt[1]):
                return []
            m = len(src[1])
            maps.append(list(range(m)))
            if m > 1:
                maps.append(list(range(m - 1, -1, -1)))
        elif src[0] == "fork" and tgt[0] == "fork":
            src_twigs, tgt_twigs = src[2], tgt[2]
            starts = [1]
            for t in tgt_twigs[:-1]:
                starts.append(starts[-1] + len(t))
            for perm in itertools.permutations(range(3)):
                if any(len(src_twigs[i]) != len(tgt_twigs[perm[i]]) for i in range(3)):
                    continue
                index_map = [0]
                for i in range(3):
                    j = perm[i]
                    index_map.extend(range(starts[j], starts[j] + len(tgt_twigs[j])))
                maps.append(index_map)
        return maps

    perms = set()
    indices = range(len(d.components))
    for target in itertools.permutations(indices):
        choices = []
        feasible = True
        for i, j in zip(indices, target):
            maps = orientation_maps(d.components[i], d.components[j])
            src_entries = comp_entries(d.components[i])
            tgt_entries = comp_entries(d.components[j])
            maps = [
                m
                for m in maps
                if all(
                    src_entries[si].skeleton() == tgt_entries[ti].skeleton()
                    for si, ti in enumerate(m)
                )
            ]
            if not maps:
                feasible = False
                break
            choices.append(maps)
        if not feasible:
            continue
        for choice in itertools.product(*choices):
            perm = [0] * n
            label_maps = [{}]
            valid = True
            for i, (j, index_map) in enumerate(zip(target, choice)):
                src_entries = comp_entries(d.components[i])
                tgt_entries = comp_entries(d.components[j])
                for si, ti in enumerate(index_map):
                    src_e, tgt_e = src_entries[si], tgt_entries[ti]
                    perm[offsets[i] + si] = offsets[j] + ti
                    src_ls = sorted(set(src_e.labels))
                    tgt_ls = sorted(set(tgt_e.labels))
                    new_maps = []
                    for m in label_maps:
                        for assign in itertools.permutations(tgt_ls):
                            m2 = dict(m)
                            good = True
                            for a, b in zip(src_ls, assign):
                                if src_e.labels.count(a) != tgt_e.labels.count(b):
                                    good = False
                                    break
                                if m2.get(a, b) != b or (
                                    b in m2.values() and a not in m2
                                ):
                                    good = False
                                    break
                                m2[a] = b
                            if good:
                                new_maps.append(m2)
                    label_maps = new_maps
                    if not label_maps:
                        valid = False
                        break
                if not valid:
                    break
            if valid and label_maps:
                perms.add(tuple(perm))
    free = len(d.free_labels)
    order = len(perms)
    for i in range(2, free + 1):
        order *= i
    return AutGroup(order, tuple(sorted(perms)))
