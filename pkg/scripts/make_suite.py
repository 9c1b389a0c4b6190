"""Regenerate fixtures/suite: a 10-item scripted evaluation set.

Every reply is keyed on the question text (or on planted evidence), never on
call order, so results do not depend on thread scheduling.

Hand count, from the table below: items 2, 5 and 8 answer a wrong letter,
the other seven match gold, so accuracy is 7/10 = 0.700.
"""

import json
import re
import shutil
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "suite"

VIDEOS = {
    "kitchen_01": (90, [
        "C picks up a plate from the rack", "C turns on the tap", "C scrubs a pan with a sponge",
        "C rinses a blue cup", "C wipes the counter", "C opens a drawer",
    ]),
    "garage_02": (60, [
        "C lifts a wrench", "C loosens a bolt on the wheel", "C inflates a tyre",
        "C oils the chain", "C spins the pedal",
    ]),
    "garden_03": (45, [
        "C fills a watering can", "C waters the tomatoes", "C pulls a weed",
        "C trims a hedge", "C carries a basket",
    ]),
}

OPT5 = ["C washes dishes", "C repairs a bicycle", "C tends a garden", "C cooks a meal", "C reads a book"]
OPT4 = OPT5[:4]

# (video, question, options, gold, scripted letter, flow)
# flow: "direct" = first plan is sufficient; ("loop", frame, evidence) = one
# round augmenting `frame` with type A; "stuck" = never sufficient.
ITEMS = [
    ("kitchen_01", "What is the overall activity of C in the kitchen?", OPT5, "A", "A", "direct"),
    ("garage_02", "What is C mainly doing in the garage?", OPT5, "B", "B", "direct"),
    ("garden_03", "Which task occupies most of C's time?", OPT5, "C", "D", "direct"),
    ("kitchen_01", "What does C place inside the drawer?", OPT5, "E",  "E",
     ("loop", 36, "EVIDENCE C slides a paperback book into the open drawer")),
    ("garage_02", "Which tool does C use on the wheel?", OPT5, "B", "B", "direct"),
    ("garden_03", "What does C carry at the end?", OPT5, "C", "A", "direct"),
    ("garage_02", "What does C check after oiling the chain?", OPT5, "B", "B",
     ("loop", 50, "EVIDENCE C squeezes the rear tyre to test the pressure")),
    ("kitchen_01", "What is C's goal with the sponge?", OPT4, "A", "A", "direct"),
    ("garden_03", "Why does C pause near the hedge?", OPT5, "C", "B", "stuck"),
    ("kitchen_01", "Which object does C rinse?", OPT4, "A", "A", "direct"),
]


def doc_lines(video_id, total, actions):
    yield {"format": "drdoc-v1", "fps": 0.5, "total_frames": total}
    for fid in range(1, total + 1):
        caption = actions[(fid - 1) * len(actions) // total]
        yield {"video_id": video_id, "frame_id": fid, "caption": caption, "detail": None,
               "vqa": None, "subtitle": None}


def entry(role, response, key=None, match=None):
    e = {"role": role, "key": key, "response": response}
    if match is not None:
        e["match"] = match
    return e


def script_entries():
    rows = []
    sufficient = {"confidence": "1", "explanation": ["the descriptions cover the question"]}
    for idx, (video, question, _, _, letter, flow) in enumerate(ITEMS):
        q = re.escape(question)
        if flow == "direct":
            rows.append(entry("plan", sufficient, key=q))
        elif flow == "stuck":
            rows.append(entry("plan", {"confidence": "0", "explanation": ["nothing explains the pause"]}, key=q))
            rows.append(entry("interact", [], key=q))
        else:
            _, frame, evidence = flow
            # evidence rule first: once the augmentation lands it wins over the question rule
            rows.append(entry("plan", sufficient, key=re.escape(evidence)))
            rows.append(entry("plan", {"confidence": "0", "explanation": [f"frame {frame} needs a closer look"]},
                              key=q))
            rows.append(entry("interact", [{"frame": str(frame), "type": "A"}], key=q))
            rows.append(entry("caption", evidence, key=f"{video}:{frame}", match="detailed description"))
        rows.append(entry("answer", {"final_answer": letter, "confidence": "2",
                                     "explaination": f"item {idx} scripted reply"}, key=q))
    rows.append(entry("caption", "no further detail is visible"))
    return rows


CONFIG = """\
[run]
k = 4
max_rounds = 2
fps = 0.5

[paths]
cache = "cache"

[llm]
kind = "scripted"
script = "script.jsonl"

[embedder]
kind = "scripted"
script = "script.jsonl"
dim = 32

[captioner]
kind = "scripted"
script = "script.jsonl"
"""


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")


if __name__ == "__main__":
    if OUT.exists():
        shutil.rmtree(OUT)
    (OUT / "cache").mkdir(parents=True)
    for vid, (total, actions) in VIDEOS.items():
        write_jsonl(OUT / "cache" / f"{vid}.jsonl", doc_lines(vid, total, actions))
    write_jsonl(OUT / "dataset.jsonl", [
        {"video_id": v, "question": q, "options": opts, "gold_letter": gold}
        for v, q, opts, gold, _, _ in ITEMS])
    write_jsonl(OUT / "script.jsonl", script_entries())
    (OUT / "config.toml").write_text(CONFIG, encoding="utf-8")
    correct = sum(gold == letter for _, _, _, gold, letter, _ in ITEMS)
    print(f"wrote {OUT} ({len(ITEMS)} items, {correct} scripted correct)")
