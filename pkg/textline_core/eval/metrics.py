"""
OCR Evaluation Metrics - edit distance, character error rate, alignment-level
precision/recall/F-measure and sequence accuracy.
"""
from typing import List, Sequence, Tuple

import Levenshtein

from ..utils.errors import EvaluationError


def levenshtein(a: Sequence, b: Sequence) -> int:
    """
    Minimum number of unit-cost insertions, deletions and substitutions turning a into b.

    Args:
        a: Symbol sequence (str or list of hashable symbols)
        b: Symbol sequence

    Returns:
        Non-negative integer distance
    """
    return Levenshtein.distance(a, b)


def _check_pairs(pairs):
    pairs = list(pairs)
    if sum(len(ref) for ref, _ in pairs) == 0:
        raise EvaluationError("total reference length is zero")
    return pairs


def character_error_rate(pairs: List[Tuple[Sequence, Sequence]]) -> float:
    """
    Calculate Character Error Rate (CER) over (reference, hypothesis) pairs.

    CER = sum of edit distances / sum of reference lengths

    Returns:
        Float >= 0 (0 is perfect; may exceed 1 with many insertions)
    """
    pairs = _check_pairs(pairs)
    total_distance = sum(levenshtein(ref, hyp) for ref, hyp in pairs)
    total_length = sum(len(ref) for ref, _ in pairs)
    return total_distance / total_length


def aligned_matches(reference: Sequence, hypothesis: Sequence) -> int:
    """
    Equal symbols aligned by a minimal edit script.

    Several minimal scripts can exist; the count follows the one
    ``Levenshtein.editops`` returns. For ("ab", "ba") a script of two
    substitutions gives 0 matches, while delete-then-insert gives 1.
    """
    ops = Levenshtein.editops(reference, hypothesis)
    edited = sum(1 for op, _, _ in ops if op in ("replace", "delete"))
    return len(reference) - edited


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean 2PR/(P+R); 0 when P + R = 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def precision_recall_f(pairs: List[Tuple[Sequence, Sequence]]) -> Tuple[float, float, float]:
    """
    Character-level precision, recall and F-measure from minimal edit alignments.

    P = matches / hypothesis symbols, R = matches / reference symbols.

    Returns:
        (precision, recall, f_measure)
    """
    pairs = _check_pairs(pairs)
    matches = sum(aligned_matches(ref, hyp) for ref, hyp in pairs)
    hyp_total = sum(len(hyp) for _, hyp in pairs)
    ref_total = sum(len(ref) for ref, _ in pairs)
    precision = matches / hyp_total if hyp_total else 0.0
    recall = matches / ref_total
    return precision, recall, f_measure(precision, recall)


def sequence_accuracy(pairs: List[Tuple[Sequence, Sequence]]) -> float:
    """Fraction of pairs whose hypothesis equals the reference exactly."""
    pairs = list(pairs)
    if not pairs:
        raise EvaluationError("no pairs to score")
    return sum(1 for ref, hyp in pairs if list(ref) == list(hyp)) / len(pairs)


def accuracy_percent(pairs: List[Tuple[Sequence, Sequence]]) -> float:
    """Reported accuracy: 100 * (1 - CER)."""
    return 100.0 * (1.0 - character_error_rate(pairs))
