"""Bundled synthetic demo corpus with a planted identity-toxicity bias.

The generator writes a comments CSV in the standard ingest format whose
identity comments are roughly twice as likely to be toxic as non-identity
comments. Classifiers trained on it inherit the bias: identity terms
acquire positive toxicity weight, so non-toxic comments that mention an
identity draw extra false positives. That makes the corpus a desk-scale
stand-in for measuring and then rebalancing away unintended bias.

Also provides matching demo artifacts: a small embedding table covering the
demo vocabulary, and a politician-tweet file with precomputed external
scores for the comparison workflow.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics.core import rng as seeded_rng

IDENTITY_COLUMNS = ("women", "muslim", "black", "gay", "jewish", "transgender")

_TOPICS = (
    "weather", "book", "coffee", "game", "road", "school", "budget", "music",
    "garden", "movie", "recipe", "news", "project", "team", "city", "park",
    "library", "market", "train", "bridge",
)
_POSITIVE = ("great", "lovely", "helpful", "interesting", "wonderful", "fantastic", "pleasant", "useful")
_NEG_MILD = ("terrible", "awful", "boring", "messy", "slow", "broken")
_INSULTS = ("stupid", "idiot", "moron", "pathetic", "trash", "garbage", "dumb", "worthless")
_STANDINS = ("ninnyhammer", "mooncalf", "clodpate", "fopdoodle", "snollygoster", "dunderhead")
_VERBS = ("like", "enjoy", "support", "appreciate")


@dataclass
class DemoCorpusSpec:
    n_comments: int = 8000
    seed: int = 13
    annotated_rate: float = 0.85
    identity_rate: float = 0.30  # among annotated comments
    toxic_rate_identity: float = 0.15
    toxic_rate_non_identity: float = 0.07
    heated_rate: float = 0.22  # non-toxic comments reusing insult vocabulary
    standin_rate: float = 0.25  # toxic comments containing a stand-in slur
    mention_repeat_rate: float = 0.7  # identity comments naming the term twice


def _compose(
    r: np.random.Generator,
    identity_term: str | None,
    insults: list[str],
    standin: str | None,
    repeat_mention: bool,
) -> str:
    """Assemble a comment from frames shared by both classes.

    Every frame word appears in toxic and non-toxic comments alike; only
    the insult count, the optional stand-in token, and the identity term
    itself separate the classes, so a bag-of-words learner faces genuinely
    overlapping text.
    """
    t1, t2 = r.choice(_TOPICS, size=2, replace=False)
    opener = (
        f"the {t1} plan and the {t2} update",
        f"today the {t1} thread and the {t2} notes",
        f"that {t1} post about the {t2}",
        f"our {t1} meeting and the {t2} report",
    )[int(r.integers(0, 4))]
    parts = [opener]
    # identical glue either way; the identity term is a pure insertion
    mention = ("with people here", "from readers here", "for people commenting")[int(r.integers(0, 3))]
    if identity_term:
        words = mention.split()
        parts.append(" ".join([words[0], identity_term, *words[1:]]))
    else:
        parts.append(mention)
    if insults:
        if len(insults) == 1:
            parts.append(f"felt {insults[0]} to me")
        else:
            parts.append("felt " + " and ".join(insults))
    else:
        parts.append(f"felt {r.choice(_POSITIVE)}" if r.random() < 0.7 else f"seemed {r.choice(_NEG_MILD)}")
    if standin:
        parts.append(f"what a {standin}")
    closer = ("honestly", "overall", "again", "frankly")[int(r.integers(0, 4))]
    if identity_term and repeat_mention:
        parts.append(f"{closer} for {identity_term} readers")
    else:
        parts.append(f"{closer} for readers")
    return " ".join(parts)


def _insult_count(r: np.random.Generator, toxic: bool) -> int:
    u = r.random()
    if toxic:
        return 1 if u < 0.15 else (2 if u < 0.60 else 3)
    return 1 if u < 0.45 else (2 if u < 0.90 else 3)


def _make_text(r: np.random.Generator, toxic: bool, identity_term: str | None, spec: "DemoCorpusSpec") -> str:
    repeat = identity_term is not None and r.random() < spec.mention_repeat_rate
    if toxic:
        insults = list(r.choice(_INSULTS, size=_insult_count(r, True), replace=False))
        standin = str(r.choice(_STANDINS)) if r.random() < spec.standin_rate else None
        return _compose(r, identity_term, insults, standin, repeat)
    if r.random() < spec.heated_rate:
        insults = list(r.choice(_INSULTS, size=_insult_count(r, False), replace=False))
        return _compose(r, identity_term, insults, None, repeat)
    return _compose(r, identity_term, [], None, repeat)


def generate_demo_rows(spec: DemoCorpusSpec) -> list[dict]:
    """Rows for the demo comments CSV: id, comment_text, target, identities."""
    r = seeded_rng(spec.seed)
    rows = []
    for i in range(spec.n_comments):
        annotated = r.random() < spec.annotated_rate
        identity = r.random() < spec.identity_rate
        toxic_rate = spec.toxic_rate_identity if identity else spec.toxic_rate_non_identity
        toxic = r.random() < toxic_rate
        term = str(r.choice(IDENTITY_COLUMNS)) if identity else None
        text = _make_text(r, toxic, term, spec)
        target = float(r.uniform(0.55, 1.0)) if toxic else float(r.uniform(0.0, 0.45))
        row = {"id": f"demo-{i:06d}", "comment_text": text, "target": f"{target:.4f}"}
        for col in IDENTITY_COLUMNS:
            row[col] = ""
        if annotated:
            zero_col = str(r.choice(IDENTITY_COLUMNS))
            row[zero_col] = "0.0"
            if identity:
                row[term] = f"{float(r.uniform(0.3, 1.0)):.4f}"
        rows.append(row)
    return rows


def write_demo_corpus(path: str | Path, spec: DemoCorpusSpec | None = None) -> int:
    spec = spec or DemoCorpusSpec()
    rows = generate_demo_rows(spec)
    fields = ["id", "comment_text", "target", *IDENTITY_COLUMNS]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    return len(rows)


def demo_vocabulary() -> list[str]:
    words = set(IDENTITY_COLUMNS) | set(_TOPICS) | set(_POSITIVE) | set(_NEG_MILD)
    words |= set(_INSULTS) | set(_STANDINS) | set(_VERBS)
    words |= {
        "the", "a", "i", "and", "is", "are", "was", "it", "this", "in", "of", "to",
        "people", "person", "community", "plan", "new", "near", "today", "our",
        "that", "update", "thread", "notes", "post", "meeting", "report", "for",
        "neighbors", "where", "residents", "spoke", "with", "felt", "seemed",
        "me", "what", "honestly", "overall", "again", "frankly", "about",
        "leaders", "working", "bill", "office", "heard", "from", "constituents",
        "honored", "celebrate", "at", "event", "we", "must", "protect", "funding",
        "local", "program", "great", "discussion", "morning", "thank", "you",
        "volunteers", "who", "improved", "week", "proud", "meet",
        "policy", "families", "town", "support", "friends", "weekend", "fools",
        "should", "stop", "posting", "commenter", "posters", "wrecking", "forum",
        "your", "opinion", "whole", "written", "by", "morons", "something",
        "idiots", "complete", "care", "deeply", "value", "neighborhood",
        "believe", "benefits", "planned", "gathering", "organized", "wonderful",
        "back", "need", "log", "off", "dolts", "total", "ruining", "entire",
        "my", "am", "helps", "everyone", "think", "here", "readers", "commenting",
    }
    return sorted(words)


def write_demo_embeddings(path: str | Path, dim: int = 25, seed: int = 99) -> int:
    """Seeded random embedding table covering the demo vocabulary."""
    r = seeded_rng(seed)
    words = demo_vocabulary()
    with open(path, "w", encoding="utf-8") as fh:
        for w in words:
            vec = r.normal(0.0, 0.5, size=dim)
            fh.write(w + " " + " ".join(f"{x:.5f}" for x in vec) + "\n")
    return len(words)


_TWEET_SHAPES = (
    "proud to meet {identity} leaders working on the {topic} bill today",
    "our office heard from {identity} constituents about the {topic} plan",
    "honored to celebrate the {identity} community at the {topic} event",
    "we must protect funding for the local {topic} program",
    "great discussion about the {topic} and the {topic2} this morning",
    "thank you to the volunteers who improved our {topic} this week",
)


def write_demo_tweets(path: str | Path, n: int = 60, seed: int = 7) -> int:
    """Benign politician-style tweets, roughly half mentioning identities."""
    r = seeded_rng(seed)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["Party", "Handle", "Tweet"])
        writer.writeheader()
        for i in range(n):
            shape = _TWEET_SHAPES[int(r.integers(0, len(_TWEET_SHAPES)))]
            t1, t2 = r.choice(_TOPICS, size=2, replace=False)
            text = shape.format(identity=r.choice(IDENTITY_COLUMNS), topic=t1, topic2=t2)
            writer.writerow(
                {
                    "Party": "Independent" if i % 2 else "Unaffiliated",
                    "Handle": f"@rep_demo_{i:03d}",
                    "Tweet": text.capitalize(),
                }
            )
    return n


def write_demo_external_scores(path: str | Path, n_tweets: int, seed: int = 23, high_rate: float = 0.1) -> int:
    """Precomputed external scores keyed by filtered-tweet index."""
    r = seeded_rng(seed)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "score"])
        writer.writeheader()
        for i in range(n_tweets):
            score = r.uniform(0.5, 0.9) if r.random() < high_rate else r.uniform(0.0, 0.45)
            writer.writerow({"id": str(i), "score": f"{score:.4f}"})
    return n_tweets
