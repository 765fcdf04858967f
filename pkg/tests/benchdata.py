"""Synthetic stores with a planted pass/fail pattern, shared by the bench tests."""
import json
import os

from ocrunit.core import load_test_store

CATEGORIES = ("alpha", "beta", "gamma")


def planted(n_docs=40):
    """Doc d has (d % 3) + 2 tests per category; test j passes iff (d + j + cat) % 4 != 0.

    Returns (store jsonl, {doc_id: candidate body}, {cat: (passed, total)}, per_doc counts).
    """
    lines, bodies, totals, per_doc = [], {}, {c: [0, 0] for c in CATEGORIES}, []
    for d in range(n_docs):
        doc = f"doc{d:02d}"
        words = []
        counts = {}
        for ci, cat in enumerate(CATEGORIES):
            p = t = 0
            for j in range((d % 3) + 2):
                word = f"w{d}x{ci}x{j}z"
                lines.append(json.dumps({"id": f"{doc}-{cat}-{j}", "doc_id": doc, "page": 1,
                                         "category": cat, "type": "present", "text": word}))
                t += 1
                if (d + j + ci) % 4 != 0:
                    words.append(word)
                    p += 1
            counts[cat] = (p, t)
            totals[cat][0] += p
            totals[cat][1] += t
        bodies[doc] = " ".join(words)
        per_doc.append(counts)
    return "\n".join(lines) + "\n", bodies, {k: tuple(v) for k, v in totals.items()}, per_doc


def write_candidates(directory, bodies, skip=()):
    os.makedirs(directory, exist_ok=True)
    for doc, body in bodies.items():
        if doc in skip:
            continue
        with open(os.path.join(directory, doc + ".md"), "w", encoding="utf-8") as fh:
            fh.write(body)


def planted_store():
    text, bodies, totals, per_doc = planted()
    return load_test_store(text), bodies, totals, per_doc
