"""Command-line interface.

Exit codes: 0 success, 1 failed assertion (with --strict where noted),
2 usage or parse errors.  All rationals print exactly.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from delpezzo3 import fixtures, homology, notation, swaps
from delpezzo3 import simulator as sim
from delpezzo3.boundary import (
    canonical_form,
    delpezzo_check_width,
    graph_automorphisms,
    render_singularity_type,
    singularity_type_of,
)
from delpezzo3.chains import dual_chain, ld_chain
from delpezzo3.reports import Report

ROOT_STEMS = {
    "w3a": "w3_a", "w3b": "w3_b",
    "w2a": "w2_a", "w2b": "w2_b", "w2c": "w2_c",
    "w2x2a": "w2x2_a", "w2x2b": "w2x2_b", "w2x2c": "w2x2_c",
    "w1a": "w1_a", "w1b": "w1_b", "w1c3": "w1_c3_notGK",
}


def _emit(report: Report, fmt: str) -> None:
    if fmt in ("csv", "both"):
        click.echo(report.render_csv(), nl=False)
    if fmt in ("markdown", "both"):
        click.echo(report.render_markdown(), nl=False)


def _load_root(name: str):
    stem = ROOT_STEMS.get(name)
    if stem is None:
        raise click.UsageError(f"unknown primitive root {name!r}")
    row = fixtures.parse_fixture_file(
        fixtures.data_dir() / "primitive" / f"{stem}.types"
    )[0]
    return notation.substitute(row.expr, {}), row.node_labels


format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "markdown", "both"]),
    default="csv", show_default=True, help="report rendering",
)


@click.group()
def main() -> None:
    """Verification and enumeration for rank-one del Pezzo surfaces of
    height 3."""


@main.command()
@click.argument("source")
@click.option("--width", type=int, default=None, help="override the width tag")
@click.option("--cutoff", type=int, default=12, show_default=True)
@click.option("--strict", is_flag=True, help="exit 1 if any row fails")
@format_option
def check(source, width, cutoff, strict, fmt):
    """Run the del Pezzo criterion on a type expression or fixture file."""
    rows = []
    path = Path(source)
    try:
        if path.exists():
            rows = fixtures.parse_fixture_file(path)
        else:
            expr = notation.parse(source)
            if width is not None:
                expr = notation.TypeExpr(expr.components, expr.constraints, width, expr.char_tag)
            rows = [fixtures.FixtureRow(name="arg", text=source, expr=expr)]
    except notation.NotationError as err:
        click.echo(f"parse error: {err}", err=True)
        sys.exit(2)
    report = Report("check", ("name", "assignment", "admissible", "lhs", "satisfied", "status"))
    failed = False
    for row in rows:
        for assignment in fixtures.row_assignments(row, cutoff):
            try:
                d = notation.substitute(row.expr, assignment)
            except notation.NotationError as err:
                click.echo(f"substitution error in {row.name}: {err}", err=True)
                sys.exit(2)
            admissible = d.is_admissible()
            if not admissible:
                report.add(row.name, _fmt_assign(assignment), False, "", False, "FAIL")
                report.count("FAIL")
                failed = True
                continue
            try:
                res = delpezzo_check_width(d)
            except ValueError as err:
                click.echo(f"cannot check {row.name}: {err}", err=True)
                sys.exit(2)
            status = "PASS" if res.satisfied else "FAIL"
            report.add(row.name, _fmt_assign(assignment), True, res.lhs, res.satisfied, status)
            report.count(status)
            failed = failed or not res.satisfied
    _emit(report, fmt)
    if strict and failed:
        sys.exit(1)


def _fmt_assign(assignment: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in sorted(assignment.items()))


@main.command("enum-abcd")
@click.option("--max", "cap", type=int, default=50, show_default=True)
@format_option
def enum_abcd(cap, fmt):
    """Enumerate the width-3 two-chain family and verify the (a,b,c,d)
    solution table."""
    solutions = fixtures.abcd_enumerate(cap)
    table = fixtures.abcd_solutions(cap)
    report = Report("enum-abcd", ("column", "box", "instances", "status"))
    boxes = fixtures.load_abcd_table()
    covered = set()
    ok = True
    for i, box in enumerate(boxes, start=1):
        instances = set(box.expand(cap))
        covered |= instances
        good = instances <= solutions
        report.add(i, _fmt_box(box), len(instances), "PASS" if good else "FAIL")
        report.count("PASS" if good else "FAIL")
        ok = ok and good
    extra = solutions - covered
    missing = covered - solutions
    report.count("solutions", len(solutions))
    report.count("outside-table", len(extra))
    report.count("table-not-solution", len(missing))
    _emit(report, fmt)
    if extra or missing or not ok:
        sys.exit(1)


def _fmt_box(box) -> str:
    parts = []
    for lo, hi in zip(box.lo, box.hi):
        if hi is None:
            parts.append(f"[{lo},inf)")
        elif hi == lo:
            parts.append(str(lo))
        else:
            parts.append(f"[{lo},{hi}]")
    return " ".join(parts)


@main.command()
@click.option("--root", "root_name", required=True, help="primitive model, e.g. w3a")
@click.option("--depth", type=int, default=8, show_default=True)
@click.option("--cutoff", type=int, default=8, show_default=True,
              help="parameter bound when matching fixture families")
@click.option("--jobs", type=int, default=1, show_default=True)
@format_option
def cascade(root_name, depth, cutoff, jobs, fmt):
    """Close a primitive model under reverse vertical swaps and match the
    result against the fixture corpus."""
    root, node_excl = _load_root(root_name)
    result = swaps.cascade(root, depth, jobs=jobs, excluded_labels=node_excl)
    known = _fixture_index(root_name, cutoff, jobs)
    report = Report("cascade", ("canonical", "depth", "status", "lhs", "match"))
    for node in result.ok_nodes():
        key = canonical_form(node.dtype)
        match = known.get(key, "")
        report.add(key[:24].decode(errors="replace"), node.depth, "PASS",
                   node.lhs, match or "EXTRA")
        report.count("PASS")
        report.count("MATCHED" if match else "EXTRA")
    for node in result.pruned_nodes():
        report.add(canonical_form(node.dtype)[:24].decode(errors="replace"),
                   node.depth, "PRUNED", node.lhs, node.status)
        report.count("PRUNED")
    _emit(report, fmt)


def _fixture_index(root_name: str, cutoff: int, jobs: int = 1) -> dict:
    out = {}
    for stem in ("char0", "char3"):
        for row in fixtures.load_table(stem):
            if row.root != root_name:
                continue
            for assignment in fixtures.row_assignments(row, cutoff):
                d = notation.substitute(row.expr, assignment)
                out[canonical_form(d)] = f"{row.name} {_fmt_assign(assignment)}".strip()
    return out


def _verify_instance(args):
    stem, name, text, sing_text, assignment = args
    expr = notation.parse(text)
    d = notation.substitute(expr, assignment)
    if stem == "nonlt_char2":
        ok = d.is_log_canonical() and not d.is_admissible()
        lhs = None
        status = "PASS" if ok else "FAIL"
    else:
        if not d.is_admissible():
            return (name, assignment, "", "FAIL", "not admissible")
        res = delpezzo_check_width(d)
        lhs = res.lhs
        status = "PASS" if res.satisfied else "FAIL"
    detail = ""
    if sing_text:
        expected = notation.substitute(
            notation.parse(sing_text, require_declared=False), assignment
        )
        if singularity_type_of(d) != singularity_type_of(expected):
            status = "FAIL"
            detail = "singularity type mismatch"
    return (name, assignment, lhs, status, detail)


@main.command("verify-tables")
@click.option("--table", "table_name", default="all", show_default=True,
              help="char0, char3, char2_moduli, char2, nonlt_char2 or all")
@click.option("--cutoff", type=int, default=12, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--cascade-depth", type=int, default=0, show_default=True,
              help="also require width-3/width-1 rows to appear in the "
                   "cascade of their primitive root (0 = skip)")
@format_option
def verify_tables(table_name, cutoff, jobs, cascade_depth, fmt):
    """Check every fixture instance: admissibility, the width inequality,
    expected singularity types, and cross-row distinctness."""
    stems = fixtures.TABLE_STEMS if table_name == "all" else (table_name,)
    tasks = []
    for stem in stems:
        if stem not in fixtures.TABLE_STEMS:
            raise click.UsageError(f"unknown table {stem!r}")
        for row in fixtures.load_table(stem):
            sing_text = notation.render(row.sing) if row.sing else None
            for assignment in fixtures.row_assignments(row, cutoff):
                tasks.append((stem, row.name, row.text, sing_text, assignment))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_verify_instance, tasks, chunksize=16))
    else:
        results = [_verify_instance(t) for t in tasks]
    report = Report("verify-tables", ("row", "assignment", "lhs", "status", "detail"))
    failed = False
    for name, assignment, lhs, status, detail in results:
        report.add(name, _fmt_assign(assignment), lhs, status, detail)
        report.count(status)
        failed = failed or status == "FAIL"
    dup_fail = _distinctness(report, stems, cutoff)
    cascade_fail = False
    if cascade_depth > 0:
        cascade_fail = _cascade_coverage(report, stems, cutoff, cascade_depth, jobs)
    _emit(report, fmt)
    if failed or dup_fail or cascade_fail:
        sys.exit(1)


def _cascade_coverage(report: Report, stems, cutoff: int, depth: int, jobs: int) -> bool:
    failed = False
    roots = sorted({
        row.root
        for stem in stems
        if stem in ("char0", "char3")
        for row in fixtures.load_table(stem)
        if row.root
    })
    for root_name in roots:
        root, node_excl = _load_root(root_name)
        root_size = len(root.entries())
        targets = []
        for stem in stems:
            if stem not in ("char0", "char3"):
                continue
            for row in fixtures.load_table(stem):
                if row.root != root_name:
                    continue
                for assignment in fixtures.row_assignments(row, cutoff):
                    d = notation.substitute(row.expr, assignment)
                    if len(d.entries()) - root_size <= depth:
                        targets.append((row.name, assignment, canonical_form(d)))
        if not targets:
            continue
        result = swaps.cascade(root, depth, jobs=jobs, excluded_labels=node_excl)
        keys = set(result.nodes)
        for name, assignment, key in targets:
            ok = key in keys
            if not ok:
                failed = True
                report.add(name, _fmt_assign(assignment), "", "FAIL",
                           f"not reached from {root_name}")
                report.count("FAIL")
        report.count(f"cascade-extra[{root_name}]",
                     len(keys) - len({k for _, _, k in targets} & keys) - 1)
    return failed


ALLOWED_COINCIDENCES = {
    # the exotic pair: two non-isomorphic surfaces share one type
    frozenset({"w3.rivet_A", "w3.nu_3=1_c2"}),
    # one family presented along two fibration choices
    frozenset({"w3.nu_3=1_s1", "w3.chains"}),
}


def _distinctness(report: Report, stems, cutoff: int) -> bool:
    """Cross-row singularity types must be pairwise distinct, except the
    documented coincidences and corners where two parameterizations give
    the identical decorated type."""
    seen: dict = {}
    for stem in stems:
        if stem == "nonlt_char2":
            continue
        for row in fixtures.load_table(stem):
            base = row.name.split("(")[0]
            for assignment in fixtures.row_assignments(row, cutoff):
                d = notation.substitute(row.expr, assignment)
                sing = singularity_type_of(d)
                seen.setdefault(sing, []).append(
                    (base, tuple(sorted(assignment.items())), canonical_form(d))
                )
    failed = False
    for sing, hits in seen.items():
        distinct_rows = {n for n, _, _ in hits}
        if len(hits) == 1 or len({(n, a) for n, a, _ in hits}) == 1:
            continue
        if len({c for _, _, c in hits}) == 1:
            report.count("duplicate-presentation")
            continue
        if frozenset(distinct_rows) in ALLOWED_COINCIDENCES:
            report.count("documented-coincidence")
            continue
        failed = True
        report.add("distinctness", render_singularity_type(sing), "", "FAIL",
                   "; ".join(f"{n} {_fmt_assign(dict(a))}" for n, a, _ in hits))
        report.count("FAIL")
    return failed


@main.command()
@click.option("--fixture", "fixture_id", type=click.Choice(["1", "2"]), default=None)
@click.option("--construct", "construct", type=click.Choice(["x1", "x2"]), default=None)
def homology_cmd(fixture_id, construct):
    """Cokernel of a restriction matrix (transcribed or rebuilt)."""
    if (fixture_id is None) == (construct is None):
        raise click.UsageError("choose exactly one of --fixture or --construct")
    if fixture_id:
        m = homology.IntMatrix(
            tuple(map(tuple, fixtures.load_matrix(f"exotic_matrix_{fixture_id}")))
        )
    else:
        plan = sim.load_plan(fixtures.data_dir() / "plans" / f"{construct}.plan")
        cfg = sim.replay(plan)
        m = homology.build_restriction_matrix(cfg, plan.fibration)
    group = homology.cokernel(m)
    click.echo(group.render())


main.add_command(homology_cmd, name="homology")


@main.command()
@click.argument("planfile", type=click.Path(exists=True))
@format_option
def simulate(planfile, fmt):
    """Replay a blowup plan and report the resulting configuration."""
    plan = sim.load_plan(Path(planfile))
    try:
        cfg = sim.replay(plan)
        d = sim.extract_decorated_type(cfg, plan.fibration)
    except sim.SimulationError as err:
        click.echo(f"simulation error: {err}", err=True)
        sys.exit(1)
    report = Report("simulate", ("item", "value"))
    report.add("plan", plan.name)
    report.add("picard-rank", cfg.picard_rank)
    report.add("K^2", cfg.k_squared)
    report.add("boundary-components", len(sim.boundary_curves(cfg)))
    report.add("singularity-type", render_singularity_type(singularity_type_of(d)))
    report.add("sigma-identity", sim.sigma_identity_check(cfg, plan.fibration))
    if plan.fibration.width == 2:
        report.add("width2-bookkeeping", sim.width2_bookkeeping_check(cfg, plan.fibration))
    if plan.fibration.width == 1:
        report.add("width1-bookkeeping", sim.width1_bookkeeping_check(cfg, plan.fibration))
    for bf in plan.fibration.base_fibers:
        data = sim.analyze_fiber(cfg, plan.fibration, bf)
        report.add(f"fiber[{bf}]",
                   f"shape={list(data.shape)} sigma={data.sigma} mu={data.mu}")
    report.add(
        "vertically-primitive",
        swaps.is_vertically_primitive(d, sim.node_labels(cfg, plan.fibration)),
    )
    _emit(report, fmt)


@main.command()
@click.argument("chain_text")
def dual(chain_text):
    """Dual chain: dp3 dual "[3]" prints [2,2]."""
    try:
        expr = notation.parse(chain_text)
        d = notation.substitute(expr, {})
        comp = d.components[0]
        weights = tuple(e.weight for e in comp[1])
    except (notation.NotationError, IndexError) as err:
        click.echo(f"parse error: {err}", err=True)
        sys.exit(2)
    try:
        out = dual_chain(weights)
    except ValueError as err:
        click.echo(str(err), err=True)
        sys.exit(1)
    click.echo("[" + ",".join(str(w) for w in out) + "]")


@main.command()
@click.argument("chain_text")
@click.argument("position", type=int)
def ld(chain_text, position):
    """Log discrepancy of a chain component: dp3 ld "[2,3]" 2."""
    try:
        expr = notation.parse(chain_text)
        d = notation.substitute(expr, {})
        comp = d.components[0]
        weights = tuple(e.weight for e in comp[1])
    except (notation.NotationError, IndexError) as err:
        click.echo(f"parse error: {err}", err=True)
        sys.exit(2)
    try:
        value = ld_chain(weights, position)
    except (ValueError, IndexError) as err:
        click.echo(str(err), err=True)
        sys.exit(1)
    click.echo(f"{value.numerator}/{value.denominator}")


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=int, default=200, show_default=True)
def selftest(seed, trials):
    """Randomized property checks: discriminant recursion, dual-chain
    blowdowns, subgraph monotonicity, swap inversion."""
    import random as _random

    from delpezzo3.chains import (
        contracts_to_zero_curve,
        discriminant,
        dual_chain,
        ld_chain,
        tree_determinant,
    )

    rng = _random.Random(seed)
    for _ in range(trials):
        t = tuple(rng.randint(2, 6) for _ in range(rng.randint(2, 8)))
        det = tree_determinant(list(t), [(i, i + 1) for i in range(len(t) - 1)])
        assert discriminant(t) == det
        cut = rng.randint(1, len(t) - 1)
        assert det == discriminant(t[:cut]) * discriminant(t[cut:]) - discriminant(
            t[:cut][:-1]
        ) * discriminant(t[cut:][1:])
        dual = dual_chain(t)
        assert contracts_to_zero_curve(t + (1,) + dual)
        smaller = tuple(rng.randint(2, w) for w in t)
        for j in range(1, len(t) + 1):
            assert ld_chain(smaller, j) >= ld_chain(t, j)
    corpus = [r for r in fixtures.load_table("char0")]
    inversions = 0
    for _ in range(trials):
        row = corpus[rng.randrange(len(corpus))]
        d = notation.substitute(row.expr, next(fixtures.row_assignments(row, 4)))
        moves = swaps.reverse_moves(d)
        if not moves:
            continue
        move = moves[rng.randrange(len(moves))]
        try:
            child = swaps.reverse_swap(d, *move)
        except swaps.SwapError:
            continue
        assert canonical_form(swaps.forward_swap(child, move[0])) == canonical_form(d)
        inversions += 1
    click.echo(f"selftest passed: {trials} chain trials, {inversions} swap inversions")


@main.command("parse")
@click.argument("text")
def parse_cmd(text):
    """Parse a type expression; print the canonical rendering and data."""
    try:
        expr = notation.parse(text)
    except notation.NotationError as err:
        click.echo(f"parse error: {err}", err=True)
        sys.exit(2)
    click.echo(notation.render(expr))
    params = expr.parameters()
    if params:
        click.echo("parameters: " + ", ".join(params))
    else:
        d = notation.substitute(expr, {})
        click.echo("singularity type: " + render_singularity_type(singularity_type_of(d)))
        aut = graph_automorphisms(d)
        click.echo(f"graph automorphisms: {aut.order}")


if __name__ == "__main__":
    main()
