#!/usr/bin/env python3
"""Write a synthetic record set with planted ground truth.

Positive records answer every symptom well above its rule threshold; healthy
records answer every symptom below it. Deterministic for a given seed.

    gen_demo_records.py data/demo/kb.json data/demo/records [--per-group 10] [--seed 7]
"""
import argparse
import csv
import json
import math
import random
from pathlib import Path


def profile_answer(q, rng):
    if q["kind"] == "categorical":
        return rng.choice(q["values"])
    ranges = {"age": (8, 59), "height": (120, 195), "weight": (30, 110), "heart_rate": (60, 180)}
    lo, hi = ranges.get(q["id"], (0, 100))
    return rng.randint(lo, hi)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("kb")
    ap.add_argument("out")
    ap.add_argument("--per-group", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    kb = json.loads(Path(args.kb).read_text())
    rng = random.Random(args.seed)
    out = Path(args.out)
    (out / "scripts").mkdir(parents=True, exist_ok=True)
    questions = kb["profile_questions"]

    rows = []
    for anomaly in kb["anomalies"]:
        aid = anomaly["id"]
        symptoms = [s for s in kb["symptoms"] if s["anomaly"] == aid]
        for truth in ("positive", "healthy"):
            for i in range(args.per_group):
                profile = {q["id"]: profile_answer(q, rng) for q in questions}
                certainty = {}
                for s in symptoms:
                    threshold = 100 * s["certainty_effect"]
                    if truth == "positive":
                        certainty[s["id"]] = rng.randint(90, 100)
                    else:
                        certainty[s["id"]] = rng.randint(0, max(0, math.ceil(threshold - 1e-9) - 1))
                rid = f"{aid}_{truth}_{i + 1:02d}"
                path = Path("scripts") / f"{rid}.json"
                (out / path).write_text(json.dumps({"profile": profile, "certainty": certainty}, indent=2, sort_keys=True) + "\n")
                rows.append([rid, aid, path.as_posix()])

    with open(out / "manifest.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["record_id", "anomaly", "file"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
