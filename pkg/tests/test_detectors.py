import pytest

from support import oracle_client
from synflow.detectors import (
    BUILTIN_KINDS, DEPENDENCE, VALUE_EQUALITY, builtin_spec, derive_labels, detector_for_pair, dump_custom_pairs,
    load_custom_spec, load_custom_specs, parse_custom_pairs, parse_signature, reference_extractor, restriction_check,
)
from synflow.extractors import SandboxRunner, SpecError, validate
from synflow.harness import RunConfig, run
from synflow.paths import ASSIGN, BIND, PathInfo, Step

EXAMPLE = """class E {
  void f(Req r, Out o) {
    String s = r.param("a");
    String t;
    t = r.param("b");
    r.param("a", "b");
    o.emit(s, t + "x");
  }
}"""

PAIR_YAML = f"""pairs:
  - name: leak
    restriction: dependence
    message: "{{source}} leaks into {{sink}}"
    source:
      description: values returned by Req.param
      signature: param(1)
      example: |
{chr(10).join('        ' + line for line in EXAMPLE.split(chr(10)))}
    sink:
      description: arguments of Out.emit
      signature: Out.emit(*)
      example: |
{chr(10).join('        ' + line for line in EXAMPLE.split(chr(10)))}
"""


def test_builtin_specs_are_well_formed():
    for kind in BUILTIN_KINDS:
        spec = builtin_spec(kind)
        assert spec.builtin and spec.source.role == "source" and spec.sink.role == "sink"
        assert spec.describe("a", "b")
    assert builtin_spec("dbz").restriction == VALUE_EQUALITY
    with pytest.raises(SpecError):
        builtin_spec("sqli")


@pytest.mark.parametrize("text,parsed", [
    ("param", ("param", None)), ("param(*)", ("param", None)), ("param()", ("param", 0)),
    ("Req.param(String name)", ("param", 1)), ("x.y.emit(a, b)", ("emit", 2)), ("emit(3)", ("emit", 3)),
])
def test_parse_signature(text, parsed):
    assert parse_signature(text) == parsed


@pytest.mark.parametrize("text", ["", "1abc()", "a b()", "f(("])
def test_parse_signature_rejects_garbage(text):
    with pytest.raises(SpecError):
        parse_signature(text)


def test_derive_labels_respects_role_and_arity():
    assert derive_labels(EXAMPLE, "param(1)", "source") == ((3, "s"), (5, "t"))
    assert derive_labels(EXAMPLE, "param(*)", "source") == ((3, "s"), (5, "t"))
    assert derive_labels(EXAMPLE, "emit(*)", "sink") == ((7, "s"), (7, "t"))
    assert derive_labels(EXAMPLE, "emit(1)", "sink") == ()


def test_custom_pairs_round_trip_and_build_detectors():
    pairs = parse_custom_pairs(PAIR_YAML)
    assert parse_custom_pairs(dump_custom_pairs(pairs)) == pairs
    detector = detector_for_pair(pairs[0])
    assert detector.restriction == DEPENDENCE and not detector.builtin
    assert detector.source.examples[0].expected == ((3, "s"), (5, "t"))
    for spec in (detector.source, detector.sink):
        body = reference_extractor(spec.kind, spec.role, spec.signature)
        assert validate(body, spec, SandboxRunner()).passed


@pytest.mark.parametrize("mutate,needle", [
    (lambda t: "pairs: []\n", "at least one"),
    (lambda t: "pairs: [", "YAML"),
    (lambda t: t.replace("name: leak", "name: 'two words'"), "simple identifier"),
    (lambda t: t.replace("restriction: dependence", "restriction: taint"), "restriction"),
    (lambda t: t.replace("signature: param(1)", "signature: '((('"), "signature"),
    (lambda t: t.replace("description: arguments of Out.emit", "description: ''"), "empty"),
    (lambda t: t + t[len("pairs:\n"):], "duplicate"),
])
def test_custom_pair_errors_name_the_field(mutate, needle):
    with pytest.raises(SpecError) as err:
        parse_custom_pairs(mutate(PAIR_YAML))
    assert needle in str(err.value)


def test_explicit_labels_override_derivation(tmp_path):
    text = PAIR_YAML.replace("      signature: param(1)\n", "      signature: param(1)\n      labels: ['3:s']\n")
    path = tmp_path / "pair.yaml"
    path.write_text(text)
    assert load_custom_spec(str(path)).source.examples[0].expected == ((3, "s"),)
    path.write_text(text.replace("['3:s']", "['3:zz']"))
    with pytest.raises(SpecError):
        load_custom_specs(str(path))


def test_custom_spec_finds_flows_end_to_end(tmp_path):
    spec = tmp_path / "pair.yaml"
    spec.write_text(PAIR_YAML)
    corpus = tmp_path / "src"
    corpus.mkdir()
    (corpus / "App.java").write_text("""class App {
  void handle(Req req, Out out) {
    String q = req.param("q");
    String copy = q;
    out.emit(copy);
    out.emit("constant");
  }
}""")
    result = run(RunConfig(corpus=str(corpus), spec_path=str(spec)), client=oracle_client())
    assert [(r.kind, r.source.line, r.sink.line) for r in result.reports] == [("leak", 3, 5)]
    assert result.reports[0].message == "q@3 leaks into copy@5"


def _info(*chain):
    return PathInfo("p", tuple(chain))


def test_restriction_check():
    copy = Step(ASSIGN, 2, "f#0", "b", "a", on_chain=True, preserving=True)
    scaled = Step(ASSIGN, 3, "f#0", "c", "b + 1", on_chain=True, preserving=False)
    side = Step(BIND, 4, "g#1", "k", "b * 2", source_frame="f#0", on_chain=False, preserving=False)
    assert restriction_check(_info(copy, side), VALUE_EQUALITY)
    assert not restriction_check(_info(copy, scaled), VALUE_EQUALITY)
    assert restriction_check(_info(copy, scaled), DEPENDENCE)
    with pytest.raises(SpecError):
        restriction_check(_info(copy), "taint")
