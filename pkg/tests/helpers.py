"""Shared builders for scripted worlds and the brute-force retrieval oracle."""

import json
import math
from pathlib import Path

from drdoc.backends import Script, scripted_backends
from drdoc.docmodel import new_document

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def brute_force_topk(query, frames, k):
    """Independent oracle: score every frame in plain Python, full sort on (-score, id)."""
    def norm(v):
        return math.sqrt(math.fsum(x * x for x in v))

    qn = norm(query)
    scored = []
    for fid, vec in frames:
        score = math.fsum(a * b for a, b in zip(query, vec)) / (qn * norm(vec))
        scored.append((-score, fid))
    scored.sort()
    return [fid for _, fid in scored[:min(k, len(frames))]]


def generic_doc(total=90, video_id="v", fps=0.5):
    return new_document(video_id, [f"C handles object {i} on the counter" for i in range(1, total + 1)], fps)


OPTIONS5 = ["C sorts tools", "C washes dishes", "C hides a key", "C paints a wall", "C reads a book"]
PLANTED = "C drops a brass key into the red box"


def planted_world(video_id="v"):
    """Evidence reachable only through one type-A augmentation of frame 42."""
    doc = generic_doc(90, video_id)
    script = Script()
    script.add("caption", PLANTED, key=f"{video_id}:42", match="detailed description")
    script.add("caption", "nothing relevant to the question is visible")
    script.add("plan", {"confidence": "1", "explanation": ["the key drop answers it"]}, key="brass key")
    script.add("plan", {"confidence": "0", "explanation": ["need to see what C puts in the box"]})
    script.add("interact", [{"frame": "42", "type": "A"}])
    script.add("answer", {"final_answer": "C", "confidence": "3", "explaination": "frame 42"}, key="brass key")
    script.add("answer", {"final_answer": "A", "confidence": "1", "explaination": "guess"})
    question = "What does C put into the red box?"
    return doc, question, OPTIONS5, script


def fresh_backends(script):
    return scripted_backends(Script.from_jsonl(script.to_jsonl()))


def read_jsonl(path):
    return [json.loads(l) for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]


PROMPT_QUESTION = "What is the main task C completes in the video?"
PROMPT_OPTIONS = ["C washes dishes", "C cooks a meal", "C repairs a bicycle", "C paints a wall", "C reads a book"]


def prompt_fixture():
    """The document, memory and ledgers the golden prompt files were written against."""
    from drdoc.agents import MemoryEntry
    from drdoc.docmodel import merge_augmentation

    doc = new_document("fixture", [f"#C C performs step {i}" for i in range(1, 91)], 0.5)
    doc = merge_augmentation(doc, 3, "B", "C rinses a blue cup under the tap")
    doc = merge_augmentation(doc, 7, "A", "A close view of a steel sink with a sponge on the left edge")
    memory = [
        MemoryEntry("initial_topk", (3, 12, 40, 41, 88), 0),
        MemoryEntry("planner_explanation",
                    ("The frames do not show what C does after rinsing the cup. Frame 7 may show the sink area.",), 0),
        MemoryEntry("requested_frames", ((7, "A"),), 0),
    ]
    return doc, memory, {7}, {3, 12, 40, 41, 88}


def golden(name):
    return (FIXTURES / "prompts" / name).read_bytes()


def fuzz_interaction_case(rng):
    """One random interaction reply plus the context it is validated against.

    ``rng`` is a ``random.Random``. Replies mix valid, out-of-range, duplicate,
    ledgered and malformed items in the shapes agents actually produce.
    """
    total = rng.randint(1, 120)
    k = rng.randint(1, 10)
    already_a = set(rng.sample(range(1, total + 1), rng.randint(0, min(total, 8))))
    already_b = set(rng.sample(range(1, total + 1), rng.randint(0, min(total, 8))))
    items = []
    for _ in range(rng.randint(0, 14)):
        roll = rng.random()
        if roll < 0.25 and (already_a or already_b):
            fid = rng.choice(sorted(already_a | already_b))
        elif roll < 0.4:
            fid = rng.choice([0, -3, total + 1, total + 50])
        else:
            fid = rng.randint(1, total)
        frame = rng.choice([fid, str(fid), f"frame {fid}"])
        kind = rng.choice(["A", "B", "a", "b", "Type A", "C", ""])
        items.append({"frame": frame, "type": kind})
    if items and rng.random() < 0.3:
        items.append(dict(items[0]))  # in-reply duplicate
    payload = json.dumps(items)
    reply = rng.choice([payload, f"```json\n{payload}\n```", f"Here you go:\n{payload}\nDone."])
    return reply, total, k, already_a, already_b


def request_violations(requests, total, k, already_a, already_b):
    """Independent checker for the request-set constraint; returns a list of problems."""
    problems = []
    if len(requests) >= k and requests:
        problems.append(f"{len(requests)} requests with k={k}")
    seen = set()
    for r in requests:
        fid, kind = r.frame_id, r.kind.value
        if not 1 <= fid <= total:
            problems.append(f"frame {fid} out of 1..{total}")
        if (fid, kind) in seen:
            problems.append(f"repeat {(fid, kind)}")
        seen.add((fid, kind))
        if fid in (already_a if kind == "A" else already_b):
            problems.append(f"{(fid, kind)} already in ledger")
    return problems


def random_world(rng):
    """A random well-formed scripted run: (doc, question, options, script, RunConfig)."""
    from drdoc.pipeline import RunConfig

    total = rng.randint(1, 60)
    k = rng.randint(1, 10)
    rounds = rng.randint(0, 4)
    doc = generic_doc(total, "r")
    script = Script()
    script.add("caption", "an augmented view")
    for _ in range(rounds + 2):
        if rng.random() < 0.25:
            script.add("plan", {"confidence": "1", "explanation": ["enough"]})
        else:
            script.add("plan", {"confidence": "0", "explanation": [f"frame {rng.randint(1, total)}"]})
    for _ in range(rounds + 1):
        reqs = [{"frame": str(rng.randint(-2, total + 3)), "type": rng.choice("AB")}
                for _ in range(rng.randint(0, 15))]
        script.add("interact", reqs)
    script.add("answer", {"final_answer": rng.choice("ABCDE"), "confidence": "2", "explaination": "x"})
    types = rng.choice([("A", "B"), ("A", "B"), ("A",), ("B",)])
    config = RunConfig(k=k, max_rounds=rounds, augment_types=frozenset(types))
    return doc, "what happens?", OPTIONS5, script, config
