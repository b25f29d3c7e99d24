#!/usr/bin/env python3
"""Convert doccano-style span annotations to the substan corpus format.

Reads JSONL where each line holds a review text plus character spans, in
either of the two doccano export layouts:

    {"id": ..., "text": ..., "label": [[start, end, "claim_neg"], ...]}
    {"id": ..., "text": ..., "entities": [{"id", "label", "start_offset",
     "end_offset"}], "relations": [{"from_id", "to_id", "type"}]}

Label names are matched loosely ("Claim_Positive", "claim-pos", "EVIDENCE
NEG" all work). Evidence is linked to its claim by, in order of preference:
a relation between the two entities, a numeric suffix shared by claim and
evidence labels ("claim_neg_2" / "evidence_neg_2"), or else the nearest
preceding claim of the same polarity.

Venue and year come from the record ("venue", "year", "conference") or are
parsed from the id ("acl2017-...", "arr_2022_..."); --venue/--year override.
Ratings ("human_substantiation", "human_difficulty") are passed through.

Lossy steps: unknown labels are dropped; evidence without any claim of its
polarity is dropped; overlapping spans are kept and left for `substan
validate` to report. This script has not been checked against the released
files, so run `substan validate` on its output.
"""

import argparse
import json
import re
import sys

POLARITY = {"pos": "pos", "positive": "pos", "neg": "neg", "negative": "neg"}
VENUES = ("conll", "acl", "coling", "arr", "iclr", "neurips", "emnlp", "naacl")


def parse_label(name):
    """Return (kind, polarity, number) or None for an unknown label."""
    parts = [p for p in re.split(r"[^a-z0-9]+", name.lower()) if p]
    kind = "claim" if any(p.startswith("claim") for p in parts) else None
    if kind is None and any(p.startswith("evid") for p in parts):
        kind = "evidence"
    polarity = next((POLARITY[p] for p in parts if p in POLARITY), None)
    if kind is None or polarity is None:
        return None
    number = next((int(p) for p in parts if p.isdigit()), None)
    return kind, polarity, number


def entities_of(record):
    if "entities" in record:
        for e in record["entities"]:
            yield e.get("id"), e["start_offset"], e["end_offset"], e["label"]
    else:
        for i, item in enumerate(record.get("label", record.get("labels", []))):
            yield i, item[0], item[1], item[2]


def venue_year(record, args):
    venue = args.venue or record.get("venue") or record.get("conference")
    year = args.year or record.get("year")
    m = re.match(r"([a-z]+)[-_ ]?(\d{4})", str(record.get("id", "")).lower())
    if m and m.group(1) in VENUES:
        venue = venue or m.group(1).upper()
        year = year or int(m.group(2))
    if not venue or not year:
        raise ValueError(f"record {record.get('id')!r}: cannot determine venue and year")
    return venue, int(year)


def convert(record, args):
    text = record["text"]
    claims, evidence = [], []
    for ent_id, start, end, label in entities_of(record):
        parsed = parse_label(label)
        if parsed is None:
            print(f"{record.get('id')}: dropping unknown label {label!r}", file=sys.stderr)
            continue
        kind, polarity, number = parsed
        item = {"ent": ent_id, "start": start, "end": end, "polarity": polarity, "number": number}
        (claims if kind == "claim" else evidence).append(item)

    spans = []
    for polarity in ("pos", "neg"):
        own = sorted((c for c in claims if c["polarity"] == polarity), key=lambda c: c["start"])
        for i, c in enumerate(own, start=1):
            c["claim_id"] = i
            spans.append({"type": f"claim_{polarity}", "start": c["start"], "end": c["end"], "claim_id": i})

    by_ent = {c["ent"]: c for c in claims}
    links = {}
    for rel in record.get("relations", []):
        a, b = rel.get("from_id"), rel.get("to_id")
        if a in by_ent:
            links[b] = by_ent[a]
        elif b in by_ent:
            links[a] = by_ent[b]

    for e in evidence:
        same = [c for c in claims if c["polarity"] == e["polarity"]]
        claim = links.get(e["ent"])
        if claim is None and e["number"] is not None:
            claim = next((c for c in same if c["number"] == e["number"]), None)
        if claim is None:
            before = [c for c in same if c["start"] <= e["start"]]
            claim = max(before, key=lambda c: c["start"]) if before else (same[0] if same else None)
        if claim is None or claim["polarity"] != e["polarity"]:
            print(f"{record.get('id')}: dropping unlinked evidence at {e['start']}", file=sys.stderr)
            continue
        spans.append({"type": f"evidence_{e['polarity']}", "start": e["start"], "end": e["end"],
                      "claim_id": claim["claim_id"]})

    venue, year = venue_year(record, args)
    out = {"id": str(record.get("id")), "venue": venue, "year": year, "text": text,
           "spans": sorted(spans, key=lambda s: (s["start"], s["end"]))}
    for key in ("human_substantiation", "human_difficulty", "annotator_id"):
        if record.get(key) is not None:
            out[key] = record[key]
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("input", help="doccano JSONL export")
    p.add_argument("output", help="substan corpus JSONL")
    p.add_argument("--venue")
    p.add_argument("--year", type=int)
    args = p.parse_args()
    n = 0
    with open(args.input, encoding="utf-8") as src, open(args.output, "w", encoding="utf-8") as dst:
        for line in src:
            if not line.strip():
                continue
            dst.write(json.dumps(convert(json.loads(line), args), ensure_ascii=False) + "\n")
            n += 1
    print(f"wrote {n} records to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
