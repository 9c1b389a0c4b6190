"""Regenerate fixtures/parses/*.jsonl.

Each entry pairs a wrapped agent reply with the label its payload was built
from. Labels are written here by hand; the package parsers are never called.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "parses"


def smart(p):
    out, opening = [], True
    for ch in p:
        if ch == '"':
            out.append("“" if opening else "”")
            opening = not opening
        else:
            out.append(ch)
    return "".join(out)


def pyquote(p):
    return p.replace('"', "'")


def trailing_comma(p):
    return p[:-1] + "," + p[-1]


def pretty(p):
    return json.dumps(json.loads(p), indent=4)


WRAPPERS = {
    "bare": lambda p: p,
    "fence_json": lambda p: "```json\n" + p + "\n```",
    "fence_plain": lambda p: "```\n" + p + "\n```",
    "prose_before": lambda p: "Sure! Here is my analysis of the video:\n" + p,
    "prose_after": lambda p: p + "\n\nLet me know if you need anything else.",
    "brace_decoy": lambda p: "Let's think step by step. Frame {3, a cup} shows rinsing. So:\n" + p,
    "pretty": pretty,
    "smart_quotes": lambda p: smart(p),
    "single_quotes": pyquote,
    "trailing_comma": trailing_comma,
    "inline": lambda p: "Output: " + p + " (end of output)",
}

PLAN_VALID = [
    ('{"confidence": "1", "explanation": ["info is sufficient"]}',
     {"sufficient": True, "explanation": ["info is sufficient"]}),
    ('{"confidence": "0", "explanation": ["frame 12 may show the tool", "need detail on frame 40"]}',
     {"sufficient": False, "explanation": ["frame 12 may show the tool", "need detail on frame 40"]}),
    ('{"confidence": 1, "explanation": ["C clearly washes dishes"]}',
     {"sufficient": True, "explanation": ["C clearly washes dishes"]}),
    ('{"confidence": "0", "explanation": "missing the final action"}',
     {"sufficient": False, "explanation": ["missing the final action"]}),
    ('{"confidence": "1", "explanation": []}',
     {"sufficient": True, "explanation": []}),
]
PLAN_WRAPPERS = ["bare", "fence_json", "fence_plain", "prose_before", "prose_after", "brace_decoy",
                 "pretty", "smart_quotes", "single_quotes", "inline"]
PLAN_SPECIAL = [
    ('{"confidence": "0/1", "explanation": ["xxxx"]}\n{"confidence": "0", "explanation": ["frame 5 is unclear"]}',
     {"sufficient": False, "explanation": ["frame 5 is unclear"]}),
    ("not json at all", {"error": "NoStructureFound"}),
    ('{"confidence": "2", "explanation": ["?"]}', {"error": "ParseFailure"}),
    ('{"explanation": ["no confidence key"]}', {"error": "ParseFailure"}),
    ('{"confidence": "0", "explanation": []}', {"error": "ParseFailure"}),
    ("I think the answer is yes, confidence 1.", {"error": "NoStructureFound"}),
]

INTERACT_VALID = [
    ('[{"frame": "12", "type": "A"}]', [[12, "A"]]),
    ('[{"frame": "4", "type": "B"}, {"frame": "40", "type": "A"}]', [[4, "B"], [40, "A"]]),
    ('[{"frame": 7, "type": "b"}]', [[7, "B"]]),
    ('[{"frame": "frame 33", "type": "Type A"}, {"frame": "1/2/3", "type": "A"}]', [[33, "A"]]),
    ('{"frame": "88", "type": "B"}', [[88, "B"]]),
    ("[]", []),
]
INTERACT_WRAPPERS = ["bare", "fence_json", "fence_plain", "prose_before", "prose_after", "brace_decoy",
                     "pretty", "single_quotes"]
INTERACT_SPECIAL = [
    ('[{"frame": "1/2/3/.../90", "type": "A/B"}]\n[{"frame": "21", "type": "A"}]', [[21, "A"]]),
    ('[{"frame": "9", "type": "C"}]', {"error": "ParseFailure"}),
    ("Frames 12 and 13 need type A.", {"error": "NoStructureFound"}),
    ('["12", "13"]', {"error": "ParseFailure"}),
]

ANSWER_VALID = [
    ('{"final_answer": "B", "confidence": "3", "explaination": "C rinses dishes throughout."}',
     {"letter": "B", "confidence": 3, "explanation": "C rinses dishes throughout."}),
    ('{"final_answer": "(C)", "confidence": 2, "explanation": "the bicycle appears often"}',
     {"letter": "C", "confidence": 2, "explanation": "the bicycle appears often"}),
    ('{"final_answer": "A: C washes dishes", "confidence": "1", "explaination": "weak evidence"}',
     {"letter": "A", "confidence": 1, "explanation": "weak evidence"}),
    ('{"final_answer": "e", "confidence": "3", "explaination": "books on every frame"}',
     {"letter": "E", "confidence": 3, "explanation": "books on every frame"}),
    ('{"final_answer": "D.", "confidence": "2", "explaination": "paint roller visible"}',
     {"letter": "D", "confidence": 2, "explanation": "paint roller visible"}),
]
ANSWER_WRAPPERS = ["bare", "fence_json", "prose_before", "prose_after", "brace_decoy", "pretty",
                   "smart_quotes", "single_quotes", "trailing_comma"]
COT = ("Let's think step by step. In frames 3-20 C holds a sponge, then rinses a cup. "
       "Nothing suggests cooking. Therefore the answer is B.\n")
ANSWER_SPECIAL = [
    (COT + '{"final_answer": "B", "confidence": "3", "explaination": "dishwashing dominates"}',
     {"letter": "B", "confidence": 3, "explanation": "dishwashing dominates"}),
    ('{"final_answer": "xxx", "confidence": "xxx", "explaination": "xxx"}\n'
     '{"final_answer": "A", "confidence": "2", "explaination": "ok"}',
     {"letter": "A", "confidence": 2, "explanation": "ok"}),
    ('{"final_answer": "F", "confidence": "3", "explaination": "none fit"}', {"error": "InvalidLetter"}),
    ('{"final_answer": "B", "confidence": "5", "explaination": "?"}', {"error": "ParseFailure"}),
    ('{"confidence": "2", "explaination": "forgot the answer"}', {"error": "ParseFailure"}),
    ("The answer is B.", {"error": "NoStructureFound"}),
]


def build(valid, wrappers, special, label):
    rows = []
    for payload, expect in valid:
        for name in wrappers:
            rows.append({"wrapper": name, "input": WRAPPERS[name](payload), "expect": label(expect)})
    for text, expect in special:
        rows.append({"wrapper": "special", "input": text,
                     "expect": expect if "error" in (expect if isinstance(expect, dict) else {}) else label(expect)})
    return rows


def write(name, rows):
    OUT.mkdir(parents=True, exist_ok=True)
    with (OUT / name).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"{name}: {len(rows)} entries")


if __name__ == "__main__":
    write("plan.jsonl", build(PLAN_VALID, PLAN_WRAPPERS, PLAN_SPECIAL, lambda e: e))
    write("interact.jsonl", build(INTERACT_VALID, INTERACT_WRAPPERS, INTERACT_SPECIAL,
                                  lambda e: {"requests": e}))
    write("answer.jsonl", build(ANSWER_VALID, ANSWER_WRAPPERS, ANSWER_SPECIAL, lambda e: e))
