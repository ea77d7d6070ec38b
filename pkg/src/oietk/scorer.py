"""Tuple-matching evaluator: precision/recall/F1 over extraction sets.

Matching is slot-against-slot at the token level (relation with relation,
arguments with arguments, subject and object compared positionally), with
tokens lower-cased and overlap counted as multiset intersection. On the
precision side every predicted tuple is credited with its best gold match
(many-to-one); on the recall side golds are assigned to predictions
one-to-one, solved optimally so that scores are independent of tuple
order. Corpus scores are micro-averaged by default.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import ExtractionSet, Triple


class DegenerateTuple(ValueError):
    """A tuple with zero tokens across all slots cannot be matched."""


class TooLarge(ValueError):
    """The exhaustive assignment oracle is restricted to 6x6 tables."""


def _lower_slots(t: Triple) -> tuple[list[str], list[str], list[str]]:
    return (
        [w.lower() for w in t.subject],
        [w.lower() for w in t.predicate],
        [w.lower() for w in t.object],
    )


def pair_match(pred: Triple, gold: Triple) -> tuple[float, float]:
    """Slot-wise multiset token overlap between one prediction and one gold;
    returns (pairwise_precision, pairwise_recall)."""
    pred_slots = _lower_slots(pred)
    gold_slots = _lower_slots(gold)
    pred_total = sum(len(s) for s in pred_slots)
    gold_total = sum(len(s) for s in gold_slots)
    if pred_total == 0 or gold_total == 0:
        raise DegenerateTuple("tuple with no tokens in any slot")
    overlap = 0
    for ps, gs in zip(pred_slots, gold_slots):
        inter = Counter(ps) & Counter(gs)
        overlap += sum(inter.values())
    return overlap / pred_total, overlap / gold_total


@dataclass
class MatchTable:
    """Pairwise precision/recall for every (pred, gold) combination of one
    sentence; rows are predictions, columns golds."""

    precision: np.ndarray  # (P, G)
    recall: np.ndarray  # (P, G)

    @classmethod
    def build(cls, preds: Sequence[Triple], golds: Sequence[Triple]) -> "MatchTable":
        p, g = len(preds), len(golds)
        prec = np.zeros((p, g))
        rec = np.zeros((p, g))
        for i, pt in enumerate(preds):
            for j, gt in enumerate(golds):
                prec[i, j], rec[i, j] = pair_match(pt, gt)
        return cls(prec, rec)


def assignment_oracle(recall_table: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Exhaustive enumeration of all injective gold->pred maps, maximizing
    total recall; ground truth for the solver used in scoring. Only for
    tables up to 6x6."""
    table = np.asarray(recall_table, dtype=float)
    n_pred, n_gold = table.shape
    if n_pred > 6 or n_gold > 6:
        raise TooLarge(f"oracle restricted to 6x6, got {table.shape}")
    if n_pred == 0 or n_gold == 0:
        return [], 0.0
    k = min(n_pred, n_gold)
    best_total = -1.0
    best: list[tuple[int, int]] = []
    for gold_subset in combinations(range(n_gold), k):
        for pred_perm in permutations(range(n_pred), k):
            total = sum(table[p, g] for p, g in zip(pred_perm, gold_subset))
            if total > best_total:
                best_total = total
                best = [(g, p) for p, g in zip(pred_perm, gold_subset)]
    return sorted(best), float(best_total)


def _optimal_assignment(recall_table: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """One-to-one gold->pred assignment maximizing total recall."""
    if recall_table.size == 0:
        return [], 0.0
    rows, cols = linear_sum_assignment(-recall_table)
    pairs = sorted((int(g), int(p)) for p, g in zip(rows, cols))
    total = float(recall_table[rows, cols].sum())
    return pairs, total


@dataclass
class SentenceScore:
    sentence_id: str
    pred_credit: float
    n_preds: int
    gold_credit: float
    n_golds: int
    assignment: list[tuple[int, int]] = field(default_factory=list)  # (gold, pred)
    degenerate_preds: int = 0
    degenerate_golds: int = 0

    @property
    def precision(self) -> float:
        return self.pred_credit / self.n_preds if self.n_preds else 0.0

    @property
    def recall(self) -> float:
        return self.gold_credit / self.n_golds if self.n_golds else 0.0


def score_sentence(
    preds: ExtractionSet,
    golds: ExtractionSet,
    *,
    one_to_one_precision: bool = False,
) -> SentenceScore:
    """Sentence-level credits: precision side credits every prediction with
    its best gold (or one-to-one when the strict flag is set); recall side
    assigns golds to predictions one-to-one, optimally."""
    if preds.sentence_id != golds.sentence_id:
        raise ValueError(
            f"sentence ids differ: {preds.sentence_id!r} vs {golds.sentence_id!r}"
        )

    def usable(triples: Iterable[Triple]) -> tuple[list[Triple], int]:
        kept, dropped = [], 0
        for t in triples:
            if sum(len(s) for s in t.slots()) == 0:
                dropped += 1
            else:
                kept.append(t)
        return kept, dropped

    pred_list, bad_preds = usable(preds)
    gold_list, bad_golds = usable(golds)
    score = SentenceScore(
        preds.sentence_id,
        0.0,
        len(pred_list),
        0.0,
        len(gold_list),
        degenerate_preds=bad_preds,
        degenerate_golds=bad_golds,
    )
    if not pred_list or not gold_list:
        return score
    table = MatchTable.build(pred_list, gold_list)
    if one_to_one_precision:
        _, score.pred_credit = _optimal_assignment(table.precision.T)
    else:
        score.pred_credit = float(table.precision.max(axis=1).sum())
    score.assignment, score.gold_credit = _optimal_assignment(table.recall)
    return score


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class ScoreReport:
    precision: float
    recall: float
    f1: float
    n_sentences: int
    skipped_missing_gold: int = 0
    skipped_missing_pred: int = 0
    sentences: list[SentenceScore] = field(default_factory=list)

    def to_dict(self, include_sentences: bool = True) -> dict:
        d = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_sentences": self.n_sentences,
            "skipped_missing_gold": self.skipped_missing_gold,
            "skipped_missing_pred": self.skipped_missing_pred,
        }
        if include_sentences:
            d["sentences"] = [
                {
                    "id": s.sentence_id,
                    "precision": s.precision,
                    "recall": s.recall,
                    "pred_credit": s.pred_credit,
                    "n_preds": s.n_preds,
                    "gold_credit": s.gold_credit,
                    "n_golds": s.n_golds,
                    "assignment": [list(pair) for pair in s.assignment],
                }
                for s in self.sentences
            ]
        return d

    def format_table(self) -> str:
        header = f"{'':12s}{'P':>8s}{'R':>8s}{'F1':>8s}"
        row = (
            f"{'corpus':12s}"
            f"{100 * self.precision:8.1f}{100 * self.recall:8.1f}{100 * self.f1:8.1f}"
        )
        return "\n".join([header, row])


def score_corpus(
    pairs: Iterable[tuple[ExtractionSet, ExtractionSet]],
    *,
    macro: bool = False,
    one_to_one_precision: bool = False,
) -> ScoreReport:
    """Fold sentence scores into corpus precision/recall/F1. Micro-averaging
    sums credits and counts across sentences; macro averages the
    per-sentence ratios."""
    sentences = [
        score_sentence(p, g, one_to_one_precision=one_to_one_precision)
        for p, g in pairs
    ]
    if macro and sentences:
        precision = sum(s.precision for s in sentences) / len(sentences)
        recall = sum(s.recall for s in sentences) / len(sentences)
    else:
        pred_credit = sum(s.pred_credit for s in sentences)
        n_preds = sum(s.n_preds for s in sentences)
        gold_credit = sum(s.gold_credit for s in sentences)
        n_golds = sum(s.n_golds for s in sentences)
        precision = pred_credit / n_preds if n_preds else 0.0
        recall = gold_credit / n_golds if n_golds else 0.0
    return ScoreReport(
        precision,
        recall,
        f1_score(precision, recall),
        len(sentences),
        sentences=sentences,
    )


def join_by_id(
    golds: Iterable[ExtractionSet], preds: Iterable[ExtractionSet]
) -> tuple[list[tuple[ExtractionSet, ExtractionSet]], list[str], list[str]]:
    """Align two corpora on sentence id; returns (pairs, ids missing from
    preds, ids missing from golds)."""
    gold_map = {g.sentence_id: g for g in golds}
    pred_map = {p.sentence_id: p for p in preds}
    missing_pred = [i for i in gold_map if i not in pred_map]
    missing_gold = [i for i in pred_map if i not in gold_map]
    pairs = [
        (pred_map[i], gold_map[i]) for i in gold_map if i in pred_map
    ]
    return pairs, missing_pred, missing_gold
