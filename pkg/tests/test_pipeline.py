import json
import random

import pytest

from helpers import PLANTED, fresh_backends, generic_doc, planted_world, random_world
from drdoc.agents import AugmentationRequest
from drdoc.backends import Script, ScriptedCaptioner, scripted_backends
from drdoc.docmodel import AugmentationType as T
from drdoc.errors import EmptyCaptionReturned
from drdoc.pipeline import LoopState, PartialAugmentation, RunConfig, apply_requests, run
from drdoc.trace import reparse, replay_script


def test_planted_evidence_found_in_one_round():
    doc, q, opts, script = planted_world()
    backends = fresh_backends(script)
    result, trace = run(doc, q, opts, RunConfig(k=5, max_rounds=2), backends)
    assert result.letter == "C"
    assert trace.calls["plan"] == 2 and trace.calls["interact"] == 1 and trace.calls["answer"] == 1
    assert trace.status == "answered" and trace.rounds == 1
    augments = [e for e in trace.events if e["event"] == "augment"]
    assert augments[-1]["frame_id"] == 42 and augments[-1]["text"] == PLANTED


def test_planted_trace_bytes_stable():
    doc, q, opts, script = planted_world()
    dumps = {run(doc, q, opts, RunConfig(), fresh_backends(script))[1].dumps() for _ in range(3)}
    assert len(dumps) == 1
    assert '"seconds"' not in dumps.pop()


def test_budget_zero_skips_interaction():
    doc, q, opts, script = planted_world()
    result, trace = run(doc, q, opts, RunConfig(max_rounds=0), fresh_backends(script))
    assert trace.status == "budget_exhausted"
    assert trace.calls["plan"] == 1 and trace.calls["interact"] == 0
    assert result.letter == "A"  # answered from what was there


def test_initial_topk_augmentation_calls():
    doc = generic_doc(90)
    script = Script().add("caption", "extra").add("plan", {"confidence": "1", "explanation": ["y"]}) \
        .add("answer", {"final_answer": "B", "confidence": "2", "explaination": "z"})
    backends = scripted_backends(script)
    _, trace = run(doc, "q?", ["1", "2", "3", "4", "5"], RunConfig(k=5), backends)
    assert trace.calls["caption"] == 5
    assert all(e["kind"] == "B" and "factual errors" in e["prompt"]
               for e in trace.events if e["event"] == "augment")


def test_initial_augmentation_skipped_without_type_b():
    doc = generic_doc(20)
    script = Script().add("plan", {"confidence": "1", "explanation": ["y"]}) \
        .add("answer", {"final_answer": "B", "confidence": "2", "explaination": "z"})
    _, trace = run(doc, "q?", list("vwxyz"), RunConfig(k=5, augment_types=frozenset("A")),
                   scripted_backends(script))
    assert trace.calls["caption"] == 0 and trace.status == "answered"


def test_apply_requests_distinct_prompts_and_empty():
    doc = generic_doc(10)
    cap = ScriptedCaptioner(Script().add("caption", "text"))
    state = LoopState(0, (), doc, ())
    assert apply_requests(state, [], cap, "q") == state and cap.calls == 0
    out = apply_requests(state, [AugmentationRequest(4, T.A), AugmentationRequest(9, T.B)], cap, "q")
    prompts = [p for _, p in cap.log]
    assert len(prompts) == 2 and prompts[0] != prompts[1]
    assert out.document.frame(4).detail_caption == "text" and out.document.frame(9).vqa_answer == "text"
    assert out.already_a == {4} and out.already_b == {9}


def test_apply_requests_partial_failure_keeps_earlier_merges():
    doc = generic_doc(10, "v")
    cap = ScriptedCaptioner(Script().add("caption", "ok", key="v:1").add("caption", "ok", key="v:3"))
    reqs = [AugmentationRequest(1, T.A), AugmentationRequest(2, T.A), AugmentationRequest(3, T.A)]
    with pytest.raises(PartialAugmentation) as info:
        apply_requests(LoopState(0, (), doc, ()), reqs, cap, "q")
    assert info.value.index == 1
    assert isinstance(info.value.__cause__, EmptyCaptionReturned)
    kept = info.value.state
    assert kept.document.frame(1).detail_caption == "ok"
    assert kept.document.frame(3).detail_caption is None


def test_backend_failure_reports_error_status():
    doc = generic_doc(10)
    script = Script().add("caption", "x")  # no plan replies at all
    result, trace = run(doc, "q", list("abcde"), RunConfig(k=2), scripted_backends(script))
    assert result is None and trace.status == "error" and "ScriptExhausted" in trace.error


def test_call_count_bounds_random_runs():
    rng = random.Random(99)
    for _ in range(100):
        doc, q, opts, script, cfg = random_world(rng)
        _, trace = run(doc, q, opts, cfg, scripted_backends(script))
        assert trace.status in ("answered", "budget_exhausted"), trace.error
        k, rounds = cfg.k, cfg.max_rounds
        assert trace.calls["plan"] <= rounds + 1
        assert trace.calls["interact"] <= rounds
        assert trace.calls["caption"] <= k + rounds * (k - 1)


def test_replay_reproduces_run():
    doc, q, opts, script = planted_world()
    result, trace = run(doc, q, opts, RunConfig(), fresh_backends(script))
    recorded = json.loads(trace.dumps())
    again, trace2 = run(doc, q, opts, RunConfig(), scripted_backends(replay_script(recorded, doc)))
    assert again == result
    strip = lambda t: [e for e in t["events"] if e["event"] != "retrieve"]  # noqa: E731
    assert strip(json.loads(trace2.dumps())) == strip(recorded)
    assert [e["ranked"][i][0] for e in json.loads(trace2.dumps())["events"] if e["event"] == "retrieve"
            for i in range(5)] == [fid for e in recorded["events"] if e["event"] == "retrieve"
                                  for fid, _ in e["ranked"]]


def test_reparse_matches_recorded():
    doc, q, opts, script = planted_world()
    _, trace = run(doc, q, opts, RunConfig(), fresh_backends(script))
    rows = reparse(json.loads(trace.dumps()))
    assert [r["role"] for r in rows] == ["plan", "interact", "plan", "answer"]
    assert all(r["match"] for r in rows)


def test_option_count_mismatch():
    doc, q, opts, script = planted_world()
    with pytest.raises(ValueError):
        run(doc, q, opts[:4], RunConfig(), fresh_backends(script))
