import os

import pytest

from support import fixture
from synflow.detectors import BUILTIN_KINDS, builtin_spec, reference_extractor
from synflow.extractors import (
    ExtractorStore, SandboxRunner, SynthesisFailedError, obtain_extractor, run_extractor,
    synthesize_extractor, validate,
)
from synflow.extractors.runner import ExtractorExecutionError, condense, parse_output, region_offset
from synflow.extractors.spec import ExtractorSpec, LabeledExample, SpecError, load_extractor_spec
from synflow.extractors.synth import describe_failure
from synflow.llm import LlmClient, ScriptedBackend
from synflow.llm.answers import fence
from synflow.syntax.parsing import load_unit

RUNNER = SandboxRunner()
NAMES = "def extract(root):\n    return [n for n in root.walk() if n.type == 'identifier' and n.text == 'x']\n"


def tiny_spec() -> ExtractorSpec:
    ex = LabeledExample("T.java", "class T {\n  void f() {\n    int x = 1;\n    int y = x;\n  }\n}", ((3, "x"), (4, "x")))
    return ExtractorSpec("demo", "source", "every occurrence of x", (ex,))


@pytest.mark.parametrize("kind", BUILTIN_KINDS)
@pytest.mark.parametrize("role", ["source", "sink"])
def test_reference_extractors_reproduce_every_label(kind, role):
    spec = getattr(builtin_spec(kind), role)
    spec.check()
    report = validate(reference_extractor(kind, role), spec, RUNNER)
    assert report.passed, describe_failure(report, spec)


def test_spec_check_catches_bad_labels():
    ex = LabeledExample("T.java", "class T {}\n", ((1, "zzz"),))
    with pytest.raises(SpecError):
        ExtractorSpec("k", "source", "d", (ex,)).check()
    with pytest.raises(SpecError):
        ExtractorSpec("k", "middle", "d", ()).check()
    with pytest.raises(SpecError):
        ExtractorSpec("k", "source", "d", (LabeledExample("T.java", "class T {", ()),)).check()


def test_spec_id_changes_with_content():
    a = tiny_spec()
    b = ExtractorSpec(a.kind, a.role, a.description + ".", a.examples)
    assert a.spec_id != b.spec_id and a.spec_id == tiny_spec().spec_id


def test_spec_file_resolves_examples_and_rejects_stray_labels(tmp_path):
    (tmp_path / "T.java").write_text(tiny_spec().examples[0].text)
    path = tmp_path / "s.yaml"
    path.write_text("kind: demo\nrole: source\ndescription: every occurrence of x\n"
                    "examples: [T.java]\nexpected: [T.java:4:x, T.java:3:x]\n")
    assert load_extractor_spec(str(path)) == tiny_spec()
    path.write_text("kind: k\nrole: source\ndescription: d\nexamples: [T.java]\nexpected: [U.java:1:x]\n")
    with pytest.raises(SpecError):
        load_extractor_spec(str(path))


def test_sandbox_runs_and_reports_lines():
    tree = load_unit(os.path.join(fixture("demo"), "Demo.java"))
    refs = run_extractor(NAMES.replace("'x'", "'z'"), tree, RUNNER, "source")
    assert [(r.identifier, r.line) for r in refs] == [("z", 12), ("z", 13)]


@pytest.mark.parametrize("body,needle", [
    ("def extract(root)\n    return []\n", "SyntaxError"),
    ("def extract(root):\n    return root.missing_attribute\n", "AttributeError"),
    ("def extract(root):\n    import socket\n    socket.create_connection(('127.0.0.1', 9))\n", "network"),
    ("def extract(root):\n    return [(1, 2, 3)]\n", "ValueError"),
    ("def extract(root):\n    open('scratch.txt', 'w').write('x')\n", "PermissionError"),
])
def test_sandbox_failures_become_condensed_diagnostics(body, needle):
    with pytest.raises(ExtractorExecutionError) as err:
        RUNNER.run(body, "(program 1:1)")
    assert needle.lower() in err.value.diagnostic.lower()
    assert "/tmp/synflow-extract-" not in err.value.diagnostic


def test_sandbox_enforces_a_time_limit():
    with pytest.raises(ExtractorExecutionError) as err:
        SandboxRunner(timeout=1.0).run("def extract(root):\n    while True:\n        pass\n", "(program 1:1)")
    assert "timed out" in err.value.diagnostic


def test_condense_points_into_the_model_region():
    stderr = (f'Traceback:\n  File "/x/extractor.py", line {region_offset() + 2}, in extract\n'
              "ZeroDivisionError: division by zero\n")
    assert condense(stderr) == "ZeroDivisionError: division by zero (extract line 2)"
    assert condense("") == "the program failed without a message"


def test_parse_output_rejects_malformed_lines():
    assert parse_output("3\tx\n3\tx\n1\ty\n") == [(1, "y"), (3, "x")]
    with pytest.raises(ExtractorExecutionError):
        parse_output("three\tx\n")


def _scripted(bodies):
    def respond(req):
        round_no = int(req.binding_map.get("round", "0"))
        return "Here.\n" + fence(bodies[min(round_no, len(bodies) - 1)], "python")
    return LlmClient(ScriptedBackend(respond))


def test_repair_loop_feeds_back_failures_until_accepted():
    spec = tiny_spec()
    wrong = NAMES.replace("'x'", "'y'")
    client = _scripted([wrong, "no code at all", NAMES])
    program = synthesize_extractor(spec, RUNNER, client, max_fixes=5)
    assert program.fix_count == 2 and program.validated
    assert "reported `y`" in program.history[0].feedback and "missed `x`" in program.history[0].feedback
    assert client.usage.prompts["extractor_synthesis"] == 1
    assert client.usage.prompts["extractor_repair"] == 2


def test_repair_loop_gives_up_after_the_budget():
    client = _scripted([NAMES.replace("'x'", "'y'")])
    with pytest.raises(SynthesisFailedError) as err:
        synthesize_extractor(tiny_spec(), RUNNER, client, max_fixes=2)
    assert err.value.program.fix_count == 2
    assert client.usage.total_prompts == 3


def test_store_caches_validated_programs_on_disk(tmp_path):
    spec = tiny_spec()
    store = ExtractorStore(str(tmp_path))
    client = _scripted([NAMES])
    first, cached = obtain_extractor(spec, RUNNER, client, store)
    assert not cached
    second, cached = obtain_extractor(spec, RUNNER, client, ExtractorStore(str(tmp_path)))
    assert cached and second.body == first.body
    assert client.usage.total_prompts == 1


def test_run_extractor_rejects_lines_outside_the_file():
    tree = load_unit(os.path.join(fixture("demo"), "Demo.java"))
    body = "def extract(root):\n    return [(999, 'x')]\n"
    with pytest.raises(ExtractorExecutionError):
        run_extractor(body, tree, RUNNER)
