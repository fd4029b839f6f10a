import os

import pytest

from support import fixture
from synflow.extractors.prelude import parse_tree
from synflow.syntax.callgraph import call_graph
from synflow.syntax.cfg import BRANCH, FALSE, LOOP, TRUE, CfgError, build_cfg, iter_paths, negate
from synflow.syntax.effects import cfg_effects
from synflow.syntax.exprs import (
    ExpressionSyntaxError, assignments_in, call_name, expr_vars, find_calls, parse_expression,
)
from synflow.syntax.parsing import ParseError, discover_sources, load_unit, parse_unit
from synflow.syntax.sexpr import serialize
from synflow.syntax.values import ValueRef, interface_values, sort_refs

DEMO = os.path.join(fixture("demo"), "Demo.java")


def unit(body: str, name: str = "T.java"):
    return parse_unit(name, body)


def only_function(text: str):
    (fn,) = unit(text).functions
    return fn


def test_functions_carry_lines_and_parameters():
    tree = load_unit(DEMO, relative_to=fixture("demo"))
    assert tree.unit.path == "Demo.java"
    names = {(f.name, f.start_line, f.end_line) for f in tree.functions}
    assert names == {("div", 2, 6), ("run", 8, 15)}
    div = tree.function_named("div")[0]
    assert [p for p, _ in div.params] == ["a", "b"]
    assert div.arity == 2
    assert tree.function_at(4) == div
    assert not tree.has_errors


def test_broken_file_still_parses_with_error_lines():
    tree = load_unit(os.path.join(fixture("broken"), "Broken.java"))
    assert tree.has_errors
    assert tree.functions


def test_discover_sources_is_sorted_and_filtered(tmp_path):
    (tmp_path / "b").mkdir()
    (tmp_path / "b" / "Z.java").write_text("class Z {}")
    (tmp_path / "A.java").write_text("class A {}")
    (tmp_path / "notes.txt").write_text("x")
    found = [os.path.relpath(p, tmp_path) for p in discover_sources(str(tmp_path))]
    assert found == ["A.java", os.path.join("b", "Z.java")]


def test_undecodable_file_is_a_parse_error(tmp_path):
    bad = tmp_path / "Bad.java"
    bad.write_bytes(b"\xff\xfe\x00class")
    with pytest.raises(ParseError):
        load_unit(str(bad))


def test_negate_wraps_condition_and_folds_constants():
    assert negate("a > 1") == "!(a > 1)"
    assert (negate(TRUE), negate(FALSE)) == (FALSE, TRUE)


def test_cfg_of_if_else_has_guarded_edges():
    fn = only_function("""class T {
  int f(int a) {
    int r = 0;
    if (a > 1) {
      r = a;
    } else {
      r = 2;
    }
    return r;
  }
}""")
    cfg = build_cfg(fn)
    assert not cfg.has_loops
    branch = next(n for n in cfg.statements if n.kind == BRANCH)
    guards = sorted(e.guard for e in cfg.successors(branch.index))
    assert guards == sorted(["a > 1", negate("a > 1")])
    assert len(list(iter_paths(cfg))) == 2


def test_cfg_marks_back_edges_and_loop_writes():
    fn = only_function("""class T {
  int f(int n) {
    int s = 0;
    while (n > 0) {
      s = s + n;
      n--;
    }
    return s;
  }
}""")
    cfg = build_cfg(fn)
    assert cfg.has_loops
    header = next(n for n in cfg.statements if n.kind == LOOP)
    assert cfg.loop_writes[header.index] == frozenset({"s", "n"})


@pytest.mark.parametrize("cond,then_guard,else_guard", [("true", TRUE, FALSE), ("false", FALSE, TRUE)])
def test_constant_conditions_produce_dead_edges(cond, then_guard, else_guard):
    fn = only_function(f"""class T {{
  void f(int a) {{
    if ({cond}) {{
      a = 1;
    }}
  }}
}}""")
    cfg = build_cfg(fn)
    branch = next(n for n in cfg.statements if n.kind == BRANCH)
    assign = cfg.locate(4, "a")
    guards = {e.dst == assign: e.guard for e in cfg.successors(branch.index)}
    assert (guards[True], guards[False]) == (then_guard, else_guard)
    assert len(cfg.simple_paths(branch.index, cfg.exit)) == 1


def test_locate_maps_lines_to_statements():
    tree = load_unit(DEMO)
    run = tree.function_named("run")[0]
    cfg = build_cfg(run)
    node = cfg.locate(13, "y")
    assert cfg.nodes[node].line == 13
    assert cfg.locate(8) == cfg.entry
    with pytest.raises(CfgError):
        cfg.locate(40)


def test_simple_paths_skip_repeated_nodes():
    fn = only_function("""class T {
  int f(int a) {
    int x = a;
    if (a > 0) { x = 1; }
    return x;
  }
}""")
    cfg = build_cfg(fn)
    start = cfg.locate(3, "x")
    end = cfg.locate(5, "x")
    assert len(cfg.simple_paths(start, end)) == 2


def test_effects_record_flows_into_written_variable():
    fn = only_function("""class T {
  int f(int a, int b) {
    int c = a + b;
    c += a;
    return c;
  }
}""")
    cfg = build_cfg(fn)
    effects = cfg_effects(cfg)
    decl = cfg.locate(3, "c")
    assert set(effects[decl].flows) == {(("a", 3), ("c", 3)), (("b", 3), ("c", 3))}
    compound = cfg.locate(4, "c")
    assert (("c", 4), ("c", 4)) in effects[compound].flows
    assert ("c", 5) in effects[cfg.locate(5, "c")].uses


def test_expression_helpers():
    node = parse_expression("Math.abs(x) + y * (int) w + f(z, 2)")
    assert [name for name, _ in expr_vars(node)] == ["y", "w"]
    assert sorted(call_name(c) for c in find_calls(node)) == ["abs", "f"]
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("a + * b")


def test_assignments_cover_declarations_and_compound_operators():
    tree = unit("""class T {
  void f() {
    int a = 1, b;
    b = a;
    a *= 2;
    a++;
  }
}""")
    (fn,) = tree.functions
    found = [(a.lhs, a.op, a.line) for a in assignments_in(fn.node.child_by_field_name("body"))]
    assert assignments_in(tree.root) == []
    assert ("a", "=", 3) in found and ("b", "=", 4) in found and ("a", "*=", 5) in found


def test_interface_values_of_the_caller():
    tree = load_unit(DEMO)
    run = tree.function_named("run")[0]
    values = interface_values(run, build_cfg(run))
    assert [str(v) for v in values.v_par] == ["in@8"]
    assert {str(v) for v in values.v_out} >= {"x@9", "y@13"}
    assert {str(v) for v in values.v_arg} >= {"z@13"}
    div = tree.function_named("div")[0]
    dvals = interface_values(div, build_cfg(div))
    assert {str(v) for v in dvals.v_ret} == {"a@4", "b@4", "b@5"}


def test_sort_refs_orders_by_unit_line_name_and_dedupes():
    refs = [ValueRef("b", 3, "B.java"), ValueRef("a", 3, "A.java"), ValueRef("a", 3, "A.java", "sink")]
    assert [(r.unit, r.identifier) for r in sort_refs(refs)] == [("A.java", "a"), ("B.java", "b")]
    with pytest.raises(ValueError):
        ValueRef("a", 1, "A.java", "nonsense")


def test_call_graph_resolves_by_name_and_arity():
    tree = load_unit(DEMO)
    graph = call_graph([tree])
    (edge,) = graph.edges
    assert (edge.caller.name, edge.callee.name, edge.line) == ("run", "div", 13)
    unresolved = {site.name for _, site in graph.unresolved}
    assert "nextInt" in unresolved


def test_class_receiver_does_not_bind_to_unrelated_method():
    tree = unit("""class T {
  static int abs(int v) { return v; }
  int f(int x) { return Math.abs(x); }
  int g(int x) { return abs(x); }
}""")
    graph = call_graph([tree])
    assert [(e.caller.name, e.callee.name) for e in graph.edges] == [("g", "abs")]


def test_serialized_tree_round_trips_through_the_extractor_reader():
    tree = load_unit(DEMO)
    text = serialize(tree)
    root = parse_tree(text)
    idents = {(n.line, n.text) for n in root.walk() if n.type == "identifier"}
    assert (13, "div") in idents and (2, "b") in idents
    assert "comment" not in text
