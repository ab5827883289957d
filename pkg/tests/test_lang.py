import random

import pytest

from systems import AID0, AID01, AID1
from sccpe import (
    ROOT,
    TRUE,
    AgentId,
    Ask,
    Extr,
    Par,
    ParseError,
    ProcObj,
    Rec,
    Space,
    Tell,
    boolvar,
    elaborate,
    eq_,
    intvar,
    ne_,
    parse,
    print_program,
    run,
    store_map,
    validate,
)
from sccpe.lang import AgentDecl, ProcessLine, parse_constraint_text
from sccpe.formula import And, BoolNeq, Sort

W, X, Y, Z = (intvar(n) for n in "WXYZ")


# ---------------------------------------------------------------------------
# parsing the two reference programs


def test_parse_message_program(message_text):
    ast = parse(message_text)
    agents = [l for l in ast.lines if isinstance(l, AgentDecl)]
    processes = [l for l in ast.lines if isinstance(l, ProcessLine)]
    assert len(agents) == 4
    assert len(processes) == 1
    assert ast.var_table == {n: Sort.INT for n in "WXYZ"}
    assert agents[0].location == ()
    assert agents[1] == AgentDecl((0,), eq_(X, 25))
    assert agents[3] == AgentDecl((0, 1), Y < 5)
    p = processes[0].process
    assert isinstance(p, Space) and p.agent == 0
    assert isinstance(p.body, Extr) and p.body.agent == 0
    inner = p.body.body
    assert isinstance(inner, Space) and inner.agent == 1
    assert isinstance(inner.body, Par)


def test_parse_spaces_program(spaces_text):
    ast = parse(spaces_text)
    assert len(ast.lines) == 6
    assert all(isinstance(l, ProcessLine) for l in ast.lines)
    assert ast.var_table["B0"] is Sort.BOOL
    assert ast.var_table["C"] is Sort.INT
    last = ast.lines[-1].process
    assert isinstance(last, Space)
    assert isinstance(last.body, Ask)
    assert isinstance(last.body.then, Rec)


def test_parse_empty_body_rejected():
    with pytest.raises(ParseError) as exc:
        parse("var X Int\nbegin\nend\n")
    assert "at least one line" in str(exc.value)


def test_parse_conflicting_sorts_rejected():
    with pytest.raises(ParseError) as exc:
        parse("var X Int\nvar X Bool\nbegin\ntell(X > 0) .\nend\n")
    assert "conflicting sorts" in str(exc.value)


def test_parse_missing_terminator():
    with pytest.raises(ParseError):
        parse("begin\ntell(true)\nend\n")


def test_parse_unknown_word():
    with pytest.raises(ParseError) as exc:
        parse("begin\ntelll(true) .\nend\n")
    assert "uppercase" in str(exc.value) or "expected" in str(exc.value)


def test_parse_comments_and_crlf():
    text = "-- header comment\r\nvar X Int\r\nbegin\r\ntell(X > 0) . -- trailing\r\nend\r\n"
    ast = parse(text)
    assert ast.lines == (ProcessLine(Tell(X > 0)),)


def test_parse_root_alone_location():
    ast = parse("begin\nroot ; true .\ntell(true) .\nend\n")
    assert ast.lines[0] == AgentDecl((), TRUE)


def test_parallel_is_right_associative_and_flattened():
    ast = parse("begin\ntell(true) || tell(false) || v(1) .\nend\n")
    (line,) = ast.lines
    p = line.process
    assert isinstance(p, Par)
    assert len(p.args) == 3


def test_ask_takes_maximal_body():
    ast = parse("var X Int\nbegin\nask X > 1 -> tell(true) || tell(false) .\nend\n")
    (line,) = ast.lines
    p = line.process
    assert isinstance(p, Ask)
    assert isinstance(p.then, Par)


def test_trailing_ask_in_parallel():
    ast = parse("var X Int\nbegin\ntell(true) || ask X > 1 -> tell(false) .\nend\n")
    (line,) = ast.lines
    p = line.process
    assert isinstance(p, Par)
    assert sum(isinstance(a, Ask) for a in p.args) == 1


# ---------------------------------------------------------------------------
# validate


def test_validate_clean_programs(message_text, spaces_text):
    assert validate(parse(message_text)) == []
    diags = validate(parse(spaces_text))
    assert [d.severity for d in diags] == ["warning"]


def test_validate_unbound_process_variable():
    ast = parse("begin\nv(1) .\nend\n")
    diags = validate(ast)
    assert any(d.severity == "error" and "v(1)" in d.message for d in diags)


def test_validate_unguarded_recursion_warning():
    ast = parse("begin\nr(1, v(1) || tell(false)) .\nend\n")
    diags = validate(ast)
    assert any(d.severity == "warning" and "not guarded" in d.message for d in diags)


def test_validate_true_ask_does_not_guard():
    ast = parse("begin\nr(1, ask true -> v(1)) .\nend\n")
    diags = validate(ast)
    assert any(d.severity == "warning" and "ask(true)" in d.message for d in diags)


def test_validate_real_guard_silences_warning():
    ast = parse("var X Int\nbegin\nr(1, ask X > 1 -> v(1)) .\nend\n")
    assert validate(ast) == []


def test_validate_undeclared_identifier():
    ast = parse("begin\ntell(X > 0) .\nend\n")
    diags = validate(ast)
    assert any(d.severity == "error" and "undeclared" in d.message for d in diags)


def test_validate_bare_int_identifier():
    ast = parse("var X Int\nbegin\ntell(X) .\nend\n")
    diags = validate(ast)
    assert any(d.severity == "error" and "stand alone" in d.message for d in diags)


def test_validate_sort_misuse_in_comparison():
    ast = parse("var P Bool\nbegin\ntell(P > 1) .\nend\n")
    assert any(d.severity == "error" for d in validate(ast))


def test_bool_equality_atoms_parse():
    ast = parse("var P, Q Bool\nbegin\ntell(P =/= Q) .\nend\n")
    assert validate(ast) == []
    (line,) = ast.lines
    assert line.process == Tell(BoolNeq(boolvar("P"), boolvar("Q")))


# ---------------------------------------------------------------------------
# elaborate


def test_elaborate_message_program_matches_reference_state(message_text):
    state = elaborate(parse(message_text))
    stores = store_map(state)
    assert stores == {ROOT: TRUE, AID0: eq_(X, 25), AID1: TRUE, AID01: Y < 5}
    procs = [o for o in state.objects if isinstance(o, ProcObj)]
    assert len(procs) == 1
    assert procs[0].aid == ROOT


def test_elaborate_adds_implicit_root_store():
    state = elaborate(parse("begin\ntell(true) .\nend\n"))
    assert store_map(state) == {ROOT: TRUE}


def test_elaborate_adds_undeclared_ancestors():
    state = elaborate(parse("var Y Int\nbegin\n0 . 1 . root ; Y < 5 .\ntell(true) .\nend\n"))
    assert store_map(state) == {ROOT: TRUE, AID1: TRUE, AID01: Y < 5}


def test_elaborate_merges_duplicate_agent_declarations():
    state = elaborate(
        parse("var X Int\nbegin\n0 . root ; X > 1 .\n0 . root ; X < 5 .\ntell(true) .\nend\n")
    )
    assert store_map(state)[AID0] == And((X < 5, X > 1))


def test_multidigit_agent_indices():
    ast = parse("begin\n[tell(true)]_12 .\n10 . root ; true .\nend\n")
    assert ast.lines[0].process == Space(12, Tell(TRUE))
    assert ast.lines[1] == AgentDecl((10,), TRUE)


def test_elaborate_line_permutation_invariant(message_text):
    ast = parse(message_text)
    reference = elaborate(ast)
    rng = random.Random(3)
    lines = list(ast.lines)
    for _ in range(10):
        rng.shuffle(lines)
        shuffled = type(ast)(ast.var_decls, tuple(lines), ast.deferred)
        assert elaborate(shuffled) == reference


def test_elaborate_spaces_program_runs_to_reference_state(spaces_text, solver):
    state = elaborate(parse(spaces_text))
    result = run(state, solver, max_steps=64)
    assert not result.truncated
    assert len(result.terminal_states) == 1
    terminal = result.terminal_states[0]
    stores = store_map(terminal)
    B0, B1, C = boolvar("B0"), boolvar("B1"), intvar("C")
    assert solver.entails(stores[ROOT], And((X >= 5, B1)))
    assert solver.entails(And((X >= 5, B1)), stores[ROOT])
    assert stores[AID1] == (Y < X)
    assert stores[AgentId((2,))] == (X >= 5)
    assert solver.entails(stores[AgentId((1, 1))], And((ne_(C, 5), B0)))
    blocked = [o for o in terminal.objects if isinstance(o, ProcObj)]
    assert len(blocked) == 1
    assert isinstance(blocked[0].program, Ask)
    assert blocked[0].aid == AID1


# ---------------------------------------------------------------------------
# print / parse round-trip


def test_print_parse_round_trip_reference(message_text, spaces_text):
    for text in (message_text, spaces_text):
        ast = parse(text)
        assert parse(print_program(ast)) == ast


def test_print_parse_round_trip_handmade():
    text = (
        "var A, B2 Int\nvar P Bool\nbegin\n"
        "root ; true .\n"
        "2 . root ; A = 3 and B2 =/= 4 and P .\n"
        "[ask A < 2 -> x(tell(P))_1 ]_1 || tell(B2 >= 0) .\n"
        "r(2, ask A > 1 -> v(2)) .\n"
        "end\n"
    )
    ast = parse(text)
    assert parse(print_program(ast)) == ast


def test_print_program_rejects_double_ask_parallel():
    ast = parse("var X Int\nbegin\ntell(true) .\nend\n")
    bad = ProcessLine(Par((Ask(TRUE, Tell(TRUE)), Ask(X > 1, Tell(TRUE)))))
    broken = type(ast)(ast.var_decls, (bad,), ())
    with pytest.raises(ValueError):
        print_program(broken)


# ---------------------------------------------------------------------------
# standalone constraint parsing (CLI surface)


def test_parse_constraint_text_with_table():
    table = {"Z": Sort.INT}
    assert parse_constraint_text("Z > 9", table) == (Z > 9)


def test_parse_constraint_text_infers_sorts():
    f = parse_constraint_text("Y < U")
    assert f == (Y < intvar("U"))
    assert parse_constraint_text("P") == boolvar("P")


def test_parse_constraint_text_rejects_mixed_sorts():
    with pytest.raises(ParseError):
        parse_constraint_text("P and P > 1")


def test_parse_constraint_text_rejects_syntax_errors():
    with pytest.raises(ParseError):
        parse_constraint_text("Z > ")
