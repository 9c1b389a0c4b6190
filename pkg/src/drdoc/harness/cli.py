"""``drdoc`` command line: caption, run, eval, replay."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..backends import BackendConfig, HttpCaptioner, scripted_backends
from ..errors import DrDocError
from ..retrieval import EmbeddingCache
from ..trace import load_trace, replay_script, reparse
from .cache import load_manifest, precaption
from .config import backend_config, load_settings
from .dataset import load_dataset, parse_item
from .evaluate import evaluate, prepare_document, run_item

log = logging.getLogger("drdoc")


def _embedding_cache(settings):
    return EmbeddingCache(settings.embeddings_path) if settings.embeddings_path else None


def cmd_caption(args) -> int:
    if args.config:
        settings = load_settings(args.config)
        captioner = settings.backends().captioner
    else:
        captioner = HttpCaptioner(BackendConfig(model_name="llava-v1.6-mistral-7b-hf"))
    results = precaption(load_manifest(args.manifest), captioner, args.fps, args.cache)
    failed = 0
    for r in results:
        print(f"{r.video_id}: {r.total_frames} frames, {r.captioned} captioned, "
              f"{r.reused} cached, {len(r.failed)} failed")
        failed += len(r.failed)
    return 1 if failed else 0


def cmd_run(args) -> int:
    settings = load_settings(args.config)
    item = parse_item(json.loads(Path(args.item).read_text(encoding="utf-8")), 1)
    result, trace = run_item(item, 0, settings.run, settings.backends(), settings.cache_dir,
                             _embedding_cache(settings))
    if args.trace:
        Path(args.trace).write_text(trace.dumps(), encoding="utf-8")
    answer = trace.answer
    if answer is None:
        print(f"status: {trace.status} ({trace.error})")
        return 1
    print(f"answer: {answer.letter} (confidence {answer.confidence}, status {trace.status}, "
          f"rounds {trace.rounds})")
    print(f"explanation: {answer.explanation}")
    return 0


def cmd_eval(args) -> int:
    settings = load_settings(args.config)
    items = load_dataset(args.dataset)
    report_path = Path(args.report)
    trace_dir = Path(args.traces) if args.traces else report_path.parent / "traces"
    report = evaluate(items, settings.run, settings.backends(), settings.cache_dir, trace_dir,
                      args.concurrency, _embedding_cache(settings))
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(report.dumps(), encoding="utf-8")
    print(report.table())
    return 0


def cmd_replay(args) -> int:
    trace = load_trace(args.trace)
    rows = reparse(trace)
    mismatches = [r for r in rows if not r["match"]]
    for r in rows:
        flag = "ok  " if r["match"] else "DIFF"
        print(f"{flag} event {r['event']:>3} {r['role']:<8} step {r['step']}: {json.dumps(r['reparsed'])}")
    print(f"{len(rows)} completions re-parsed, {len(mismatches)} differ from the recorded parse")
    status = 1 if mismatches else 0
    if args.config:
        # full re-execution against a script rebuilt from the trace
        from ..pipeline import run

        settings = load_settings(args.config)
        item = parse_item({"video_id": trace["video_id"], "question": trace["question"],
                           "options": trace["options"]}, 1)
        doc = prepare_document(item, settings.cache_dir)
        answer, fresh = run(doc, trace["question"], trace["options"], settings.run,
                            scripted_backends(replay_script(trace, doc)))
        same = (fresh.answer.to_json() if fresh.answer else None) == trace["answer"]
        print(f"re-executed: status {fresh.status}, answer "
              f"{fresh.answer.letter if fresh.answer else None}; "
              f"{'matches' if same else 'DIFFERS FROM'} recorded answer")
        status = status or (0 if same else 1)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drdoc", description="Long-video QA over caption documents.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("caption", help="caption sampled frames into the document cache")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fps", type=float, default=0.5)
    p.add_argument("--cache", required=True)
    p.add_argument("--config", help="TOML config whose [captioner] section is used")
    p.set_defaults(func=cmd_caption)

    p = sub.add_parser("run", help="answer one question item")
    p.add_argument("--item", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--trace")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="evaluate a JSON Lines question set")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--traces", help="trace directory (default: <report dir>/traces)")
    p.add_argument("--concurrency", type=int, default=4)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="re-parse a trace through the current parsers")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", help="also re-execute the run from the trace using this config's cache")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DrDocError, OSError, ValueError) as exc:
        print(f"drdoc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
