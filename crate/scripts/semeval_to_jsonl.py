#!/usr/bin/env python3
"""Convert SemEval-2016 Task 3 XML (subtask B or D) to qrerank JSONL.

Subtask B: every OrgQuestion/Thread/RelQuestion becomes one record with
qo_text = subject + body of the original question and qs_text = subject +
body of the related question. Subtask D: every Question/QApair becomes one
record, with the answer text stored as comment_text.

Parse trees are optional. Pass --trees with a JSONL file of
{"id": ..., "trees": ["(S ...)", ...]} objects keyed by question id
(ORGQ_ID / RELQ_ID for B, QID / QAID for D).
"""

import argparse
import json
import sys
import xml.etree.ElementTree as ET

D_LABELS = {"D": "Direct", "R": "Related", "I": "Irrelevant"}


def text(node, *tags):
    parts = []
    for tag in tags:
        child = node.find(tag)
        if child is not None and child.text:
            parts.append(" ".join(child.text.split()))
    return " ".join(p for p in parts if p)


def load_trees(path):
    trees = {}
    if path is None:
        return trees
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            if line.strip():
                obj = json.loads(line)
                if obj["id"] in trees:
                    sys.exit(f"{path}:{n}: duplicate id {obj['id']!r}")
                trees[obj["id"]] = obj["trees"]
    return trees


def attach(record, trees, qo_id, qs_id):
    if trees:
        for field, key in (("qo_trees", qo_id), ("qs_trees", qs_id)):
            if key not in trees:
                sys.exit(f"no trees for {key!r}")
            record[field] = trees[key]
    return record


def task_b(root, trees):
    for orgq in root.iter("OrgQuestion"):
        qid = orgq.get("ORGQ_ID")
        qo = text(orgq, "OrgQSubject", "OrgQBody")
        for relq in orgq.iter("RelQuestion"):
            cid = relq.get("RELQ_ID")
            record = {
                "query_id": qid,
                "candidate_id": cid,
                "original_rank": int(relq.get("RELQ_RANKING_ORDER")),
                "qo_text": qo,
                "qs_text": text(relq, "RelQSubject", "RelQBody"),
                "gold_label": relq.get("RELQ_RELEVANCE2ORGQ"),
            }
            yield attach(record, trees, qid, cid)


def task_d(root, trees):
    for q in root.iter("Question"):
        qid = q.get("QID")
        qo = text(q, "Qtext")
        for rank, pair in enumerate(q.iter("QApair"), 1):
            cid = pair.get("QAID")
            record = {
                "query_id": qid,
                "candidate_id": cid,
                "original_rank": rank,
                "qo_text": qo,
                "qs_text": text(pair, "QAquestion"),
                "gold_label": D_LABELS[pair.get("QArel")],
                "comment_text": text(pair, "QAanswer"),
            }
            yield attach(record, trees, qid, cid)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("xml")
    ap.add_argument("--task", choices=["B", "D"], required=True)
    ap.add_argument("--trees")
    ap.add_argument("-o", "--out", default="-")
    args = ap.parse_args()

    root = ET.parse(args.xml).getroot()
    trees = load_trees(args.trees)
    records = task_b(root, trees) if args.task == "B" else task_d(root, trees)
    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8")
    count = 0
    for r in records:
        out.write(json.dumps(r, ensure_ascii=False) + "\n")
        count += 1
    if out is not sys.stdout:
        out.close()
    print(f"{count} records", file=sys.stderr)


if __name__ == "__main__":
    main()
