"""Shared fixtures and independent oracles for the test suite.

The oracle functions here deliberately avoid the implementations they
check: chi-squared goes through observed/expected cell sums and AUC through
explicit pair counting.
"""

from pathlib import Path

import numpy as np
import pytest

from edusent.textprep import LemmaRuleTable, StopwordList

DATA_DIR = Path(__file__).parent / "data"
SAMPLE_CSV = DATA_DIR / "sample_feedback.csv"


@pytest.fixture(scope="session")
def sample_csv() -> Path:
    return SAMPLE_CSV


@pytest.fixture(scope="session")
def stopwords() -> StopwordList:
    return StopwordList.load()


@pytest.fixture(scope="session")
def lemma_rules() -> LemmaRuleTable:
    return LemmaRuleTable.load()


def chi2_bruteforce(a: float, b: float, c: float, d: float) -> float:
    """Sum of (observed - expected)^2 / expected over the 2x2 table."""
    n = a + b + c + d
    row = (a + b, c + d)
    col = (a + c, b + d)
    if 0 in row or 0 in col:
        return 0.0
    total = 0.0
    observed = ((a, b), (c, d))
    for i in range(2):
        for j in range(2):
            expected = row[i] * col[j] / n
            total += (observed[i][j] - expected) ** 2 / expected
    return total


def auc_pair_counting(scores, labels) -> float:
    """(concordant + 0.5 * tied) / (P * N) over every pos/neg pair."""
    pos = [s for s, y in zip(scores, labels) if int(y) == 1]
    neg = [s for s, y in zip(scores, labels) if int(y) == 0]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


def make_labels(values):
    """ints/bools -> SentimentLabel list."""
    from edusent.ingest import SentimentLabel

    return [SentimentLabel.POSITIVE if v else SentimentLabel.NEGATIVE for v in values]


def toy_template_corpus():
    """20 short token sequences, 10 clearly positive / 10 clearly negative."""
    positive = [
        ["lecture", "engage", "informative"],
        ["great", "professor", "clear", "explanation"],
        ["amaze", "class", "love", "material"],
        ["excellent", "teacher", "helpful", "feedback"],
        ["wonderful", "course", "fair", "exam"],
        ["fantastic", "lecture", "learn", "lot"],
        ["brilliant", "professor", "engage", "discussion"],
        ["awesome", "class", "fun", "project"],
        ["inspire", "teacher", "great", "example"],
        ["enjoy", "course", "clear", "grade"],
    ]
    negative = [
        ["terrible", "professor", "bore", "lecture"],
        ["awful", "class", "unfair", "exam"],
        ["confuse", "lecture", "dry", "material"],
        ["worst", "course", "rude", "teacher"],
        ["horrible", "experience", "vague", "assignment"],
        ["bore", "class", "ignore", "question"],
        ["bad", "professor", "harsh", "grade"],
        ["dull", "lecture", "useless", "feedback"],
        ["disappoint", "course", "poor", "organization"],
        ["avoid", "class", "impossible", "test"],
    ]
    tokens = positive + negative
    labels = [1] * len(positive) + [0] * len(negative)
    return tokens, labels


def negation_pair_corpus(n_train_pairs: int = 200, n_test_pairs: int = 100, seed: int = 5):
    """Order-dependent labels over identical bags: [not A but B] is positive,
    [A but not B] is negative. Train and test use disjoint (A, B) pairs."""
    adjectives = [
        "engage", "informative", "clear", "fair", "helpful", "organized",
        "interest", "useful", "fun", "kind", "bore", "confuse", "dry",
        "harsh", "vague", "rude", "dull", "slow", "loud", "strict",
    ]
    combos = [(a, b) for a in adjectives for b in adjectives if a != b]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(combos))
    chosen = [combos[i] for i in order[: n_train_pairs + n_test_pairs]]

    def expand(pairs):
        tokens, labels = [], []
        for a, b in pairs:
            tokens.append(["not", a, "but", b])
            labels.append(1)
            tokens.append([a, "but", "not", b])
            labels.append(0)
        return tokens, labels

    train = expand(chosen[:n_train_pairs])
    test = expand(chosen[n_train_pairs:])
    return train, test
