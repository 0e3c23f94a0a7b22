#!/usr/bin/env python3
"""Reference SQuAD-style scorer used to freeze tests/data/metrics_oracle.json.

Follows the SQuAD v1.1 evaluation script (normalize_answer, token F1), with
precision and recall reported alongside F1. With several gold answers the
gold that maximizes F1 supplies all three numbers; EM is the max over golds.

Regenerate with:  python3 tests/oracles/squad_reference.py > tests/data/metrics_oracle.json
"""
import collections
import json
import re
import string


def normalize_answer(s):
    def remove_articles(text):
        return re.sub(r"\b(a|an|the)\b", " ", text)

    def white_space_fix(text):
        return " ".join(text.split())

    def remove_punc(text):
        exclude = set(string.punctuation)
        return "".join(ch for ch in text if ch not in exclude)

    return white_space_fix(remove_articles(remove_punc(s.lower())))


def prf(prediction, ground_truth):
    pred = normalize_answer(prediction).split()
    gold = normalize_answer(ground_truth).split()
    common = collections.Counter(pred) & collections.Counter(gold)
    same = sum(common.values())
    if same == 0:
        return 0.0, 0.0, 0.0
    p = same / len(pred)
    r = same / len(gold)
    return p, r, 2 * p * r / (p + r)


def score(prediction, golds):
    em = max(int(normalize_answer(prediction) == normalize_answer(g)) for g in golds)
    best = None
    for g in golds:
        cur = prf(prediction, g)
        if best is None or cur[2] > best[2]:
            best = cur
    return em, best


PAIRS = [
    ("Donald Trump", ["Donald Trump"]),
    ("donald trump", ["Donald Trump"]),
    ("Biden", ["Joe Biden"]),
    ("", ["x"]),
    ("the quick fox", ["quick brown fox"]),
    ("The Godfather", ["Godfather"]),
    ("Donald  Trump.", ["donald trump"]),
    ("James Cameron", ["James Francis Cameron"]),
    ("an apple a day", ["apple day"]),
    ("A Tale of Two Cities", ["Tale of Two Cities"]),
    ("Paris, France", ["Paris"]),
    ("paris", ["Paris", "Paris, France"]),
    ("France", ["Paris, France", "the French Republic"]),
    ("1997", ["1997"]),
    ("in 1997", ["1997"]),
    ("December 19, 1997", ["19 December 1997"]),
    ("yes", ["yes"]),
    ("no", ["yes"]),
    ("New York City", ["New York"]),
    ("New York", ["New York City", "NYC"]),
    ("the the the", ["the"]),
    ("a", ["an"]),
    ("U.S.A.", ["USA"]),
    ("U.S. Navy", ["United States Navy", "US Navy"]),
    ("rock-and-roll", ["rock and roll"]),
    ("rock and roll", ["rockandroll"]),
    ("Mary's lamb", ["Marys lamb"]),
    ("cats cats dogs", ["cats dogs dogs"]),
    ("one two three four", ["four three two one"]),
    ("Leonardo da Vinci", ["da Vinci"]),
    ("Ludwig van Beethoven", ["Beethoven"]),
    ("The Beatles", ["Beatles", "The Fab Four"]),
    ("Fab Four", ["The Beatles", "The Fab Four"]),
    ("  spaced   out  ", ["spaced out"]),
    ("Tab\tseparated", ["tab separated"]),
    ("(parenthetical) answer", ["answer"]),
    ("answer!!!", ["Answer?"]),
    ("William Shakespeare wrote Hamlet", ["Shakespeare"]),
    ("Shakespeare", ["William Shakespeare wrote Hamlet"]),
    ("apple banana", ["cherry date"]),
    ("42", ["forty-two", "42"]),
    ("3.14", ["314"]),
    ("Dr. Strangelove", ["Doctor Strangelove"]),
    ("the Nile river", ["Nile"]),
    ("Mount Everest", ["Everest", "Mt. Everest"]),
    ("a b c", ["b c d"]),
    ("Theatre", ["the atre"]),
    ("an", ["the"]),
    ("Anne of Green Gables", ["Anne of Green Gables"]),
    ("the United Kingdom of Great Britain", ["United Kingdom", "Great Britain"]),
]

assert len(PAIRS) == 50

rows = []
for pred, golds in PAIRS:
    em, (p, r, f1) = score(pred, golds)
    rows.append({"prediction": pred, "golds": golds, "em": em,
                 "precision": p, "recall": r, "f1": f1,
                 "normalized": normalize_answer(pred)})
print(json.dumps({"pairs": rows}, indent=1))
