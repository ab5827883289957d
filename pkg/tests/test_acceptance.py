"""Acceptance suite: one test per criterion, one printed verdict line each.

Informational targets (reachable-state and solution counts of the
reference runs) are printed with a DIVERGES flag where canonical-form
state identity differs from the reference tool's; strict assertions are
enforced with zero tolerance.
"""

import random

import pytest

from engine_oracle import oracle_step
from randgen import fragment_formula, raw_state, small_state, tight_formula
from systems import AID0, AID01, AID1, AID20, base_system, inconsistent_variant, same_knowledge_variant
from conftest import PROGRAMS
from sccpe import (
    FALSE,
    ROOT,
    TRUE,
    AgentId,
    Ask,
    InconsistentStore,
    ParseError,
    ProcObj,
    Solver,
    StoreEntails,
    StoresEquivalent,
    SysState,
    boolvar,
    brute_force_sat,
    check_sat,
    conjoin,
    elaborate,
    entails,
    eq_,
    intvar,
    ne_,
    normalize,
    parse,
    print_program,
    run,
    search,
    small_model_bound,
    step,
    store_map,
    validate,
)
from sccpe.calculus import Nil, StoreObj
from sccpe.formula import And

W, X, Y, Z = (intvar(n) for n in "WXYZ")


def report(capsys, n, verdict, detail=""):
    with capsys.disabled():
        suffix = f"  [{detail}]" if detail else ""
        print(f"\nACCEPTANCE {n:>2}: {verdict}{suffix}")


def explore(init, solver):
    """Full closure: all reachable states and all transition edges."""
    visited = {init}
    edges = []
    frontier = [init]
    while frontier:
        nxt = []
        for s in frontier:
            for t in step(s, solver):
                edges.append((s, t))
                if t not in visited:
                    visited.add(t)
                    nxt.append(t)
        frontier = nxt
    return visited, edges


@pytest.fixture(scope="module")
def explorations():
    solver = Solver()
    systems = {
        "message-program": elaborate(parse((PROGRAMS / "message.sccp").read_text())),
        "base": base_system(),
        "inconsistent-variant": inconsistent_variant(),
        "same-knowledge-variant": same_knowledge_variant(),
        "spaces-program": elaborate(parse((PROGRAMS / "spaces.sccp").read_text())),
    }
    return {name: explore(init, solver) for name, init in systems.items()}, solver


def test_criterion_01_golden_trace(capsys, solver):
    state = elaborate(parse((PROGRAMS / "message.sccp").read_text()))
    result = run(state, solver, max_steps=64)
    assert not result.truncated
    assert len(result.terminal_states) == 1
    stores = store_map(result.terminal_states[0])
    expected = {
        ROOT: TRUE,
        AID0: eq_(X, 25),
        AID1: Z >= 10,
        AID01: Y < 5,
        AID20: W < Y,
    }
    assert stores == expected  # canonical forms, zero tolerance
    procs = [o for o in result.terminal_states[0].objects if isinstance(o, ProcObj)]
    assert procs == []
    report(capsys, 1, "PASS", "unique terminal state, all five stores exact")


def test_criterion_02_inconsistency_negative(capsys, solver):
    outcome = search(base_system(), InconsistentStore(), solver=solver)
    assert len(outcome.matches) == 0  # strict
    states = outcome.states_explored
    detail = f"0 solutions; states={states} (target 19: {'matches' if states == 19 else 'DIVERGES'})"
    report(capsys, 2, "PASS", detail)


def test_criterion_03_inconsistency_positive(capsys, solver):
    outcome = search(inconsistent_variant(), InconsistentStore(), solver=solver)
    assert len(outcome.matches) >= 1  # strict
    for m in outcome.matches:
        ((aid, store),) = m.witnesses
        assert aid == AID1
        assert solver.check_unsat(store)  # rechecks as unsatisfiable
    sols, states = len(outcome.matches), outcome.states_explored
    flag_s = "matches" if sols == 16 else "DIVERGES: canonical conjunct order merges mirrored stores"
    flag_n = "matches" if states == 55 else "DIVERGES, same cause"
    report(capsys, 3, "PASS", f"solutions={sols} (target 16: {flag_s}); states={states} (target 55: {flag_n})")


def test_criterion_04_knowledge_inference(capsys, solver):
    negative = search(base_system(), StoreEntails(Y > 9), solver=solver)
    assert len(negative.matches) == 0  # strict
    positive = search(base_system(), StoreEntails(Z > 9), solver=solver)
    assert len(positive.matches) >= 1
    for m in positive.matches:
        assert m.witnesses == ((AID1, Z >= 10),)  # strict: store Z>=10 at 1.root
    count = len(positive.matches)
    report(
        capsys,
        4,
        "PASS",
        f"Y>9: 0 solutions; Z>9: every witness Z>=10 at 1.root,"
        f" count={count} (target 8: {'matches' if count == 8 else 'DIVERGES'})",
    )


def test_criterion_05_same_knowledge(capsys, solver):
    negative = search(base_system(), StoresEquivalent(), solver=solver)
    assert len(negative.matches) == 0  # strict
    positive = search(same_knowledge_variant(), StoresEquivalent(), solver=solver)
    assert len(positive.matches) >= 1
    for m in positive.matches:
        stores = {str(c) for _, c in m.witnesses}
        assert stores == {"Z:Integer >= 10", "Z:Integer > 9"}  # strict pairing
    count = len(positive.matches)
    report(
        capsys,
        5,
        "PASS",
        f"0 base solutions; variant pairs Z>=10/Z>9,"
        f" count={count} (target 2: {'matches' if count == 2 else 'DIVERGES'})",
    )


def test_criterion_06_second_program_final_state(capsys, solver):
    state = elaborate(parse((PROGRAMS / "spaces.sccp").read_text()))
    result = run(state, solver, max_steps=64)
    assert not result.truncated
    assert len(result.terminal_states) >= 1
    B0, B1, C = boolvar("B0"), boolvar("B1"), intvar("C")
    for terminal in result.terminal_states:
        stores = store_map(terminal)
        assert solver.entails(stores[ROOT], And((X >= 5, B1)))
        assert stores[AID1] == (Y < X)
        assert stores[AgentId((2,))] == (X >= 5)
        assert solver.entails(stores[AgentId((1, 1))], And((ne_(C, 5), B0)))
        blocked = [o for o in terminal.objects if isinstance(o, ProcObj)]
        assert len(blocked) == 1  # the ask Y < 3 process never reduces
        assert isinstance(blocked[0].program, Ask)
        assert str(blocked[0].program.guard) == "Y:Integer < 3"
        assert blocked[0].aid == AID1
    report(capsys, 6, "PASS", f"{len(result.terminal_states)} terminal state(s), ask Y<3 unreduced in all")


def test_criterion_07_solver_oracle_equivalence(capsys):
    rng = random.Random(20240811)
    total = 0
    unsat = 0
    for corpus, count in ((fragment_formula, 1000), (tight_formula, 500)):
        for _ in range(count):
            f = corpus(rng)
            internal = check_sat(f).is_sat
            oracle = brute_force_sat(f, small_model_bound(f))
            assert internal == oracle, f"disagreement on {f}"
            total += 1
            unsat += not internal
    assert total >= 1000
    report(capsys, 7, "PASS", f"{total} formulas, 100% agreement ({unsat} unsatisfiable)")


def test_criterion_08_lattice_laws(capsys):
    solver = Solver()
    rng = random.Random(77)
    checked = 0
    for _ in range(500):
        c = fragment_formula(rng)
        d = fragment_formula(rng)
        e = fragment_formula(rng)
        # reflexivity
        assert solver.entails(c, c)
        # upper-bound laws
        assert solver.entails(conjoin(c, d), c)
        assert solver.entails(conjoin(c, d), d)
        # least-upper-bound law
        if solver.entails(e, c) and solver.entails(e, d):
            assert solver.entails(e, conjoin(c, d))
        # transitivity on a constructed chain (guaranteed premises)
        chain_c = conjoin(conjoin(d, e), c)
        chain_d = conjoin(d, e)
        assert solver.entails(chain_c, chain_d)
        assert solver.entails(chain_d, e)
        assert solver.entails(chain_c, e)
        # plus the random-instance reading of transitivity
        if solver.entails(c, d) and solver.entails(d, e):
            assert solver.entails(c, e)
        # top / bottom
        assert solver.entails(FALSE, c)
        assert solver.entails(c, TRUE)
        checked += 1
    report(capsys, 8, "PASS", f"{checked} triples, all laws hold")


def test_criterion_09_engine_oracle_equivalence(capsys):
    solver = Solver()
    rng = random.Random(4242)
    count = 0
    nonempty = 0
    for _ in range(150):
        s = small_state(rng)
        mine = set(step(s, solver))
        theirs = oracle_step(s, solver)
        assert mine == theirs, f"successor sets differ on {s}"
        count += 1
        nonempty += bool(mine)
    report(capsys, 9, "PASS", f"{count} states, successor sets identical ({nonempty} with successors)")


def test_criterion_10_normalization_laws(capsys, explorations):
    rng = random.Random(31337)
    for _ in range(500):
        s = raw_state(rng)
        normal = normalize(s)
        assert normalize(normal) == normal
        objs = list(s.objects)
        rng.shuffle(objs)
        assert normalize(SysState(tuple(objs))) == normal
    # store-per-aid uniqueness and no-nil invariants on every state reached
    # by the reference explorations
    maps, _ = explorations
    visited_total = 0
    for name, (visited, _edges) in maps.items():
        for state in visited:
            aids = [o.aid for o in state.objects if isinstance(o, StoreObj)]
            assert len(aids) == len(set(aids)), f"duplicate store in {name}"
            assert all(
                not isinstance(o.program, Nil) for o in state.objects if isinstance(o, ProcObj)
            )
            visited_total += 1
    report(capsys, 10, "PASS", f"500 random states + invariants on {visited_total} explored states")


def test_criterion_11_store_monotonicity(capsys, explorations):
    maps, solver = explorations
    edges_total = 0
    for name, (_visited, edges) in maps.items():
        for before, after in edges:
            old = store_map(before)
            new = store_map(after)
            for aid, phi in old.items():
                if aid in new:
                    assert solver.entails(new[aid], phi), f"store shrank at {aid} in {name}"
            edges_total += 1
    assert edges_total > 0
    report(capsys, 11, "PASS", f"{edges_total} transitions, stores only gain information")


def test_criterion_12_parser(capsys):
    message = (PROGRAMS / "message.sccp").read_text()
    spaces = (PROGRAMS / "spaces.sccp").read_text()
    for text in (message, spaces):
        ast = parse(text)
        assert parse(print_program(ast)) == ast  # round-trip
    with pytest.raises(ParseError) as exc1:
        parse("var X Int begin end")
    assert "at least one line" in str(exc1.value)
    with pytest.raises(ParseError) as exc2:
        parse("var X Int var X Bool begin tell(X > 0) . end")
    assert "conflicting sorts" in str(exc2.value)
    diags = validate(parse("begin v(1) . end"))
    assert any(d.severity == "error" and "v(1)" in d.message for d in diags)
    report(capsys, 12, "PASS", "both programs round-trip; all three negative cases diagnosed")
