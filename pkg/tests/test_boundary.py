import random
from fractions import Fraction

import pytest

from delpezzo3.boundary import (
    DecoratedType,
    Entry,
    canonical_form,
    chain_comp,
    delpezzo_check_general,
    delpezzo_check_width,
    fork_comp,
    graph_automorphisms,
    render_singularity_type,
    singularity_type_of,
)

F = Fraction


def E(w, h=False, u=False, labels=()):
    return Entry(w, h, u, tuple(labels))


def chain(*weights, horizontal=(), two_section=(), labels=None):
    labels = labels or {}
    entries = []
    for i, w in enumerate(weights, start=1):
        entries.append(
            E(w, i in horizontal or i in two_section, i in two_section,
              labels.get(i, ()))
        )
    return chain_comp(entries)


def xbar1():
    # [2,2,3,(2)_5] + [3,2] with horizontal marks at positions 2, 4, 6,
    # the decorated type of the first surface of the exotic pair (k = 3).
    c1 = chain(2, 2, 3, 2, 2, 2, 2, 2, horizontal=(2, 4, 6),
               labels={1: (1,), 2: (5,), 3: (2,), 4: (4,), 5: (1,),
                       6: (3,), 7: (5,), 8: (4,)})
    c2 = chain(2, 3, labels={1: (2,), 2: (3,)})
    return DecoratedType((c1, c2), width=3)


def xbar2():
    c1 = chain(2, 2, 3, 2, 2, 2, 2, 2, horizontal=(3, 5),
               labels={1: (4,), 2: (5,), 3: (2,), 4: (1,), 5: (4,),
                       6: (3,), 8: (2,)})
    c2 = chain(2, 3, horizontal=(2,), labels={1: (1,), 2: (3, 5)})
    return DecoratedType((c1, c2), width=3)


def test_xbar1_check():
    res = delpezzo_check_width(xbar1())
    assert res.satisfied and res.lhs == F(5, 3)
    gen = delpezzo_check_general(xbar1(), [1, 1, 1], 3)
    assert gen.satisfied and gen.lhs == F(5, 3) and gen.rhs == 1


def test_xbar2_check():
    res = delpezzo_check_width(xbar2())
    assert res.satisfied and res.lhs == F(67, 45)


def test_width2_fixture_fails():
    u = chain(2, 2, 2, 3, 2, 3, 2, horizontal=(4,), two_section=(6,))
    d = DecoratedType((u,), width=2)
    res = delpezzo_check_width(d)
    assert not res.satisfied and res.lhs == F(11, 13)
    gen = delpezzo_check_general(d, [1, 2], 3)
    assert not gen.satisfied and gen.lhs == F(11, 13)


def test_width1_fixture_fails():
    d = DecoratedType((chain(2, 2, 2, 3, 2, 2, 2, horizontal=(4,)),), width=1)
    res = delpezzo_check_width(d)
    assert not res.satisfied and res.lhs == F(1, 3) and res.rhs == F(1, 3)


def test_width3_fork_fixture_fails():
    fork = fork_comp(
        E(2),
        (
            (E(2),),
            (E(2),),
            (E(2), E(3, True), E(2), E(2, True), E(2), E(2, True)),
        ),
    )
    d = DecoratedType((fork, chain(3)), width=3)
    res = delpezzo_check_width(d)
    assert not res.satisfied and res.lhs == 1


def test_all_canonical_width3_passes():
    comps = (chain(2, 2, horizontal=(1,)), chain(2, horizontal=(1,)),
             chain(2, 2, 2, horizontal=(2,)))
    d = DecoratedType(comps, width=3)
    res = delpezzo_check_width(d)
    assert res.satisfied and res.lhs == 3


def test_check_rejects_non_admissible():
    d = DecoratedType(
        (fork_comp(E(2), ((E(3),), (E(3),), (E(3, True),))),
         chain(2, horizontal=(1,)), chain(2, horizontal=(1,))),
        width=3,
    )
    with pytest.raises(ValueError):
        delpezzo_check_width(d)


def test_validation_errors():
    with pytest.raises(ValueError):
        DecoratedType((chain(1),))
    with pytest.raises(ValueError):
        DecoratedType((chain(2, horizontal=(1,)),), width=2)
    with pytest.raises(ValueError):
        Entry(2, horizontal=False, two_section=True)
    with pytest.raises(ValueError):
        DecoratedType((chain(2, labels={1: (7, 7)}),
                       chain(3, labels={1: (7, 7)}),))


def test_singularity_type():
    t = singularity_type_of(xbar1())
    assert render_singularity_type(t) == "[2,2,2,2,2,3,2,2]+[2,3]"
    assert singularity_type_of(xbar1()) == singularity_type_of(xbar2())
    empty = DecoratedType(())
    assert singularity_type_of(empty) == ()


def test_singularity_type_reversal_and_twigs():
    a = DecoratedType((chain(2, 3, 4),))
    b = DecoratedType((chain(4, 3, 2),))
    assert singularity_type_of(a) == singularity_type_of(b)
    f1 = DecoratedType((fork_comp(E(2), ((E(2), E(2)), (E(3),), (E(2),))),))
    f2 = DecoratedType((fork_comp(E(2), ((E(3),), (E(2),), (E(2), E(2)))),))
    assert singularity_type_of(f1) == singularity_type_of(f2)


def test_canonical_form_label_renaming():
    d1 = xbar1()
    relabeled = DecoratedType(
        (
            chain(2, 2, 3, 2, 2, 2, 2, 2, horizontal=(2, 4, 6),
                  labels={1: (3,), 2: (2,), 3: (5,), 4: (1,), 5: (3,),
                          6: (4,), 7: (2,), 8: (1,)}),
            chain(2, 3, labels={1: (5,), 2: (4,)}),
        ),
        width=3,
    )
    assert canonical_form(d1) == canonical_form(relabeled)


def test_canonical_form_reversal_and_component_order():
    d1 = DecoratedType((chain(2, 3, labels={1: (1,)}), chain(2, 2)))
    d2 = DecoratedType((chain(2, 2), chain(3, 2, labels={2: (2,)})))
    assert canonical_form(d1) == canonical_form(d2)


def test_canonical_form_twig_permutation():
    f1 = fork_comp(E(2), ((E(2), E(2)), (E(3),), (E(2),)))
    f2 = fork_comp(E(2), ((E(2),), (E(2), E(2)), (E(3),)))
    assert canonical_form(DecoratedType((f1,))) == canonical_form(
        DecoratedType((f2,))
    )


def test_exotic_pair_not_isomorphic():
    assert canonical_form(xbar1()) != canonical_form(xbar2())


def test_canonical_form_congruence_random():
    rng = random.Random(7)

    def random_type():
        comps = []
        usage = {l: 0 for l in range(1, rng.randint(2, 4))}
        for _ in range(rng.randint(1, 3)):
            n = rng.randint(1, 4)
            entry_labels = {}
            for i in range(1, n + 1):
                candidates = [l for l, used in usage.items() if used < 3]
                if candidates and rng.random() < 0.4:
                    l = rng.choice(candidates)
                    usage[l] += 1
                    entry_labels[i] = (l,)
            comps.append(chain(*(rng.choice([2, 2, 3]) for _ in range(n)),
                                labels=entry_labels))
        return DecoratedType(tuple(comps))

    def shuffled(d):
        comps = list(d.components)
        rng.shuffle(comps)
        out = []
        relabel = {l: n for n, l in
                   enumerate(sorted(d.labels(), key=lambda _: rng.random()), 10)}
        for c in comps:
            entries = [
                Entry(e.weight, e.horizontal, e.two_section,
                      tuple(relabel[l] for l in e.labels))
                for e in c[1]
            ]
            if rng.random() < 0.5:
                entries.reverse()
            out.append(chain_comp(entries))
        return DecoratedType(tuple(out))

    seen = {}
    for _ in range(120):
        d = random_type()
        assert canonical_form(d) == canonical_form(shuffled(d))
        seen[canonical_form(d)] = d


def test_automorphism_orders():
    three_chains = DecoratedType(
        (chain(2, 2), chain(2, 2), chain(2, 2))
    )
    assert graph_automorphisms(three_chains).order == 48
    assert graph_automorphisms(DecoratedType((chain(2, 3),))).order == 1
    assert graph_automorphisms(DecoratedType((chain(2, 2),))).order == 2


def test_automorphism_labels_break_symmetry():
    d = DecoratedType((chain(2, 2, labels={1: (1,)}), chain(2, 2)))
    # the flip of the labeled chain is no longer an automorphism, the
    # unlabeled one still flips
    assert graph_automorphisms(d).order == 2


def test_automorphism_free_labels():
    d = DecoratedType((chain(2),), free_labels=frozenset({8, 9}))
    assert graph_automorphisms(d).order == 2


def test_ld_positions_fork():
    fork = fork_comp(E(2), ((E(2),), (E(2),), (E(2), E(3, True))))
    d = DecoratedType((fork,))
    assert d.ld(0, (3, 2)) == F(1, 3)
    assert d.ld(0, "branch") == F(1, 3)


def test_primitive_char3_automorphism_report():
    # The decorated graphs of the two characteristic-3 primitive models
    # have small symmetry groups (the decorations pin the fibration); the
    # geometric groups of orders 12 and 24 act on the surfaces and divide
    # the undecorated graph symmetries.  Both numbers are reported, with
    # no claim of equality.
    from delpezzo3 import fixtures, notation

    def undecorate(d):
        comps = []
        for c in d.components:
            if c[0] == "chain":
                comps.append(chain_comp([Entry(e.weight) for e in c[1]]))
            else:
                comps.append(fork_comp(
                    Entry(c[1].weight),
                    tuple(tuple(Entry(e.weight) for e in t) for t in c[2]),
                ))
        return DecoratedType(tuple(comps))

    expected = {"w1_b": (2, 96, 12), "w1_c3_notGK": (6, 1152, 24)}
    for stem, (dec, undec, geometric) in expected.items():
        row = fixtures.parse_fixture_file(
            fixtures.data_dir() / "primitive" / f"{stem}.types"
        )[0]
        d = notation.substitute(row.expr, {})
        assert graph_automorphisms(d).order == dec
        full = graph_automorphisms(undecorate(d)).order
        assert full == undec
        assert full % geometric == 0


def test_width_dispatch_agrees_with_general():
    import random as _random
    from delpezzo3.boundary import delpezzo_check_general

    rng = _random.Random(13)
    built = 0
    while built < 1000:
        width = rng.choice([1, 2, 3])
        n = rng.randint(max(3, width), 8)
        horizontals = rng.sample(range(1, n + 1), width)
        two_section = (horizontals[0],) if width == 2 else ()
        weights = [rng.choice([2, 2, 2, 3, 4]) for _ in range(n)]
        comp = chain(*weights, horizontal=tuple(horizontals), two_section=two_section)
        d = DecoratedType((comp,), width=width)
        built += 1
        specific = delpezzo_check_width(d)
        degrees = []
        for ci, pos in d.horizontal_positions():
            degrees.append(2 if d.entry_at(ci, pos).two_section else
                           (3 if width == 1 else 1))
        general = delpezzo_check_general(d, degrees, 3)
        assert specific.satisfied == general.satisfied
        if width != 1:
            assert specific.lhs == general.lhs


def test_failed_check_stays_failed_under_weight_growth():
    import random as _random

    rng = _random.Random(14)
    rows = [r.expr for r in __import__("delpezzo3.fixtures", fromlist=["x"]).load_negative()]
    from delpezzo3 import notation as _notation

    for expr in rows:
        d = _notation.substitute(expr, {})
        assert not delpezzo_check_width(d).satisfied
        for _ in range(10):
            comps = list(d.components)
            ci = rng.randrange(len(comps))
            comp = comps[ci]
            if comp[0] != "chain":
                continue
            entries = list(comp[1])
            if rng.random() < 0.5:
                j = rng.randrange(len(entries))
                e = entries[j]
                entries[j] = Entry(e.weight + 1, e.horizontal, e.two_section, e.labels)
            else:
                entries.insert(0, Entry(2))
            comps[ci] = chain_comp(entries)
            bigger = DecoratedType(tuple(comps), d.width, d.char_tag, d.free_labels)
            assert not delpezzo_check_width(bigger).satisfied


def test_canonical_form_collision_sweep():
    # canonical forms are injective up to isomorphism: any two random
    # types that collide must carry identical label-free data, and the
    # sweep must produce many distinct classes
    import random as _random

    rng = _random.Random(99)
    buckets = {}
    for _ in range(2000):
        n_comp = rng.randint(1, 3)
        comps = []
        usage = {l: 0 for l in (1, 2, 3)}
        for _ in range(n_comp):
            n = rng.randint(1, 4)
            labels = {}
            for i in range(1, n + 1):
                free = [l for l, u in usage.items() if u < 3]
                if free and rng.random() < 0.35:
                    l = rng.choice(free)
                    usage[l] += 1
                    labels[i] = (l,)
            comps.append(chain(*(rng.choice([2, 3, 4]) for _ in range(n)),
                                labels=labels))
        d = DecoratedType(tuple(comps))
        buckets.setdefault(canonical_form(d), []).append(d)
    assert len(buckets) > 1200
    for key, members in buckets.items():
        base = singularity_type_of(members[0])
        pattern = sorted(
            sorted(e.labels and len(e.labels) or 0 for e in m.entries())
            for m in members
        )
        for m in members:
            assert singularity_type_of(m) == base
