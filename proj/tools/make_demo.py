#!/usr/bin/env python3
"""Regenerate the bundled demo fixtures in data/demo.

Hand-written inputs (posts, views, subscribers, player model) come from a
fixed seed; the rest is produced by running the karma binary over them.
"""
import argparse
import csv
import json
import random
import subprocess
from pathlib import Path

SUBREDDITS = {
    # subscribers in millions; only pics and photocritique are known values
    "photocritique": 0.03656,
    "itookapicture": 0.174044,
    "CrappyDesign": 0.247151,
    "OldSchoolCool": 5.064231,
    "EarthPorn": 7.058654,
    "aww": 8.809353,
    "funny": 10.450075,
    "pics": 18.399582,
}
POSTS_PER_SUB = 200
WORDS = "old new first my our little big morning evening winter summer view dog cat street light shadow".split()
NOUNS = "photo picture sunset bridge door sign garden portrait lake kitchen mountain friend".split()


def title(rng):
    return " ".join(rng.sample(WORDS, 2) + [rng.choice(NOUNS)]).capitalize()


def write_inputs(out, rng):
    lines, views = [], []
    t0 = 1483228800
    for sub in SUBREDDITS:
        for i in range(POSTS_PER_SUB):
            pid = f"{sub[:3].lower()}{i:04d}"
            image = f"{pid}x"
            score = int(rng.lognormvariate(5, 1.6))
            post = {
                "id": pid,
                "subreddit": sub,
                "title": title(rng),
                "url": f"https://i.imgur.com/{image}.jpg",
                "score": score,
                "created_utc": t0 + rng.randrange(31_536_000),
            }
            lines.append(json.dumps(post))
            if rng.random() < 0.95:
                views.append((image, int(score * rng.uniform(20, 80)) + rng.randrange(500)))
        # a repost with a lower score, and a non-image link
        dup = json.loads(lines[-1])
        dup["id"] += "r"
        dup["score"] = max(0, dup["score"] - 5)
        lines.append(json.dumps(dup))
        lines.append(json.dumps({"id": f"{sub}-self", "subreddit": sub, "title": "Discussion",
                                 "url": f"https://www.reddit.com/r/{sub}/comments/x", "score": 3,
                                 "created_utc": t0}))
    lines.insert(10, '{"id": "broken", "subreddit": "pics"')
    lines.insert(500, json.dumps({"id": "noscore", "subreddit": "aww", "title": "x",
                                  "url": "https://i.imgur.com/q.jpg", "created_utc": t0}))
    (out / "posts.jsonl").write_text("\n".join(lines) + "\n")

    with open(out / "views.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["image_id", "views"])
        w.writerows(views)
    with open(out / "subscribers.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["subreddit", "subscribers_millions"])
        for sub, m in SUBREDDITS.items():
            w.writerow([sub, m])
    model = {
        "preference": "latent",
        "latent_bias": 0.3,
        "latent_delta_slope": 3.0,
        "latent_spread": 1.0,
        "prediction_skill": 0.6,
        "questionnaire_rate": 0.78,
        "heavy_share": 0.3,
        "casual_share": 0.4,
        "response_median_ms": 9000,
        "response_sigma": 0.6,
        "incorrect_extra_ms": 1500,
        "abandon_rate": 0.1,
        "prediction_bonus": {"heavy": 0.05},
    }
    (out / "model.json").write_text(json.dumps(model, indent=2) + "\n")


def run(karma, *args):
    subprocess.run([karma, *map(str, args)], check=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--karma", default="build/tools/karma")
    ap.add_argument("--out", default="data/demo", type=Path)
    ap.add_argument("--seed", default=2017, type=int)
    ap.add_argument("--sessions", default=1000, type=int)
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    write_inputs(a.out, random.Random(a.seed))
    run(a.karma, "ingest", "--posts", a.out / "posts.jsonl", "--views", a.out / "views.csv",
        "--out", a.out / "corpus.json")
    run(a.karma, "pairgen", "--corpus", a.out / "corpus.json", "--per-subreddit", 50, "--seed", a.seed,
        "--out", a.out / "plan.json")
    run(a.karma, "simulate", "--plan", a.out / "plan.json", "--corpus", a.out / "corpus.json",
        "--model", a.out / "model.json", "--sessions", a.sessions, "--seed", a.seed, "--data-dir", a.out)


if __name__ == "__main__":
    main()
