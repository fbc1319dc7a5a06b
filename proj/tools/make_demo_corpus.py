#!/usr/bin/env python3
"""Regenerates data/demo/corpus.jsonl, the small labeled demo corpus.

Each user has a hidden willingness w. It drives past response behaviour,
word choice and the final label, so the pipeline has something to find.
Output is fully determined by --seed.
"""
import argparse
import json
import math
import random

QUERY_TIME = 1370044800  # 2013-06-01 00:00:00 UTC

SOCIAL = "talk share friend chat meet people social communicate tell ask answer reply we our together".split()
FRIENDLY = "friends family party fun music dinner home team game love happy hope great".split()
NEUTRAL = ("the a of to in on for with is was today news report update price market weather "
           "traffic city flight delay airport line security check store product order phone").split()
GLOOMY = "tired sick bad awful worry never nobody hate alone".split()
PROFILE_SOCIAL = "love talking tweeting sharing chatting with friends and my community".split()
PROFILE_OTHER = "engineer runner coffee news sports fan official account opinions my own".split()


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def make_text(rng, w, length):
    words = []
    for _ in range(length):
        u = rng.random()
        if u < 0.15 + 0.15 * w:
            words.append(rng.choice(SOCIAL))
        elif u < 0.35 + 0.2 * w:
            words.append(rng.choice(FRIENDLY))
        elif u < 0.45:
            words.append(rng.choice(GLOOMY))
        else:
            words.append(rng.choice(NEUTRAL))
    return " ".join(words)


def make_user(rng, idx):
    w = rng.gauss(0.0, 1.0)
    p_w = sigmoid(w)
    start = QUERY_TIME - rng.randint(20, 400) * 86400
    end = QUERY_TIME - int(rng.expovariate(1.0 / (86400 * (1.5 - p_w)))) - 60
    end = max(end, start)
    n_posts = rng.randint(0, 40) if idx % 17 else 0
    posts = []
    for _ in range(n_posts):
        ts = rng.randint(start, end)
        retweet = rng.random() < 0.3
        text = "" if retweet and rng.random() < 0.2 else make_text(rng, p_w, rng.randint(4, 14))
        posts.append({"ts": ts, "text": text, "is_retweet": retweet, "is_reply": rng.random() < 0.25})
    posts.sort(key=lambda p: p["ts"])

    questions = []
    for directed, count in ((True, rng.randint(0, 6)), (False, rng.randint(0, 5))):
        for _ in range(count):
            asked = rng.randint(start, QUERY_TIME - 3600)
            q = {"asked_at": asked, "directed": directed}
            if rng.random() < (0.2 + 0.6 * p_w if directed else 0.1 + 0.3 * p_w):
                q["responded_at"] = asked + int(rng.expovariate(1.0 / (60 * (30 + 600 * (1 - p_w)))))
            questions.append(q)
    questions.sort(key=lambda q: q["asked_at"])

    pool = PROFILE_SOCIAL if rng.random() < p_w else PROFILE_OTHER
    profile = " ".join(rng.sample(pool, rng.randint(2, 6)))
    label = 1 if rng.random() < sigmoid(1.8 * w - 0.6) else -1
    return {
        "user_id": f"demo{idx:03d}",
        "profile_text": profile,
        "posts": posts,
        "inbound_questions": questions,
        "label": label,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=160)
    ap.add_argument("--seed", type=int, default=2013)
    ap.add_argument("--out", default="data/demo/corpus.jsonl")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    with open(args.out, "w", encoding="utf-8") as f:
        for i in range(1, args.users + 1):
            f.write(json.dumps(make_user(rng, i), separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
