"""Significance testing: paired Wilcoxon signed rank and Friedman/Finner."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import chi2, norm, rankdata

EXACT_LIMIT = 12  # enumerate all 2^m sign patterns up to this many nonzero pairs


class WilcoxonResult(NamedTuple):
    statistic: float  # signed rank sum W+ - W-
    p_value: float


def wilcoxon_signed_rank(a, b) -> WilcoxonResult:
    """Two-tailed paired Wilcoxon signed rank test.

    Zero differences are discarded; tied absolute differences share midranks.
    With at most 12 nonzero pairs the null distribution is enumerated exactly
    over all sign patterns, otherwise the normal approximation with tie and
    continuity corrections is used. All-zero differences give p = 1.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"paired samples differ in length: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 5:
        raise ValueError(f"need at least 5 pairs, got {a.shape[0]}")
    diffs = a - b
    diffs = diffs[diffs != 0]
    m = diffs.shape[0]
    if m == 0:
        return WilcoxonResult(0.0, 1.0)

    ranks = rankdata(np.abs(diffs))
    signs = np.sign(diffs)
    statistic = float(signs @ ranks)

    if m <= EXACT_LIMIT:
        # Midranks are multiples of 1/2, so doubled ranks are exact integers.
        ranks2 = np.rint(2.0 * ranks).astype(np.int64)
        observed = abs(int(np.rint(2.0 * statistic)))
        sums = np.zeros(1, dtype=np.int64)
        for r in ranks2:
            sums = np.concatenate([sums - r, sums + r])
        p = float(np.count_nonzero(np.abs(sums) >= observed) / sums.shape[0])
        return WilcoxonResult(statistic, p)

    w_plus = float(ranks[diffs > 0].sum())
    mean = m * (m + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance = m * (m + 1) * (2 * m + 1) / 24.0
    variance -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    if variance <= 0:
        return WilcoxonResult(statistic, 1.0)
    deviation = w_plus - mean
    corrected = deviation - 0.5 * np.sign(deviation)
    z = corrected / np.sqrt(variance)
    p = min(1.0, 2.0 * float(norm.sf(abs(z))))
    return WilcoxonResult(statistic, p)


@dataclass
class FriedmanFinnerResult:
    """Average ranks plus control-vs-others z tests with Finner adjustment.

    Entries for the control algorithm itself are NaN.
    """

    avg_ranks: np.ndarray
    z_scores: np.ndarray
    raw_p: np.ndarray
    adjusted_p: np.ndarray
    chi_square: float
    chi_square_p: float
    control: int


def friedman_finner(scores, control: int = 0, higher_is_better: bool = True) -> FriedmanFinnerResult:
    """Friedman ranks over a (datasets x algorithms) score matrix.

    Rank 1 goes to the best score in each row (highest when higher_is_better,
    lowest otherwise), with midranks for ties. Pairwise z tests compare each
    algorithm against the control column; Finner's step-down correction
    adjusts the resulting p-values.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError("scores must be a (datasets x algorithms) matrix")
    n_datasets, n_algorithms = scores.shape
    if n_datasets < 2:
        raise ValueError(f"need at least 2 datasets, got {n_datasets}")
    if n_algorithms < 2:
        raise ValueError(f"need at least 2 algorithms, got {n_algorithms}")
    if not 0 <= control < n_algorithms:
        raise ValueError(f"control index {control} out of range")

    oriented = -scores if higher_is_better else scores
    ranks = np.vstack([rankdata(row) for row in oriented])
    avg_ranks = ranks.mean(axis=0)

    k = n_algorithms
    chi_square = float(
        12.0 * n_datasets / (k * (k + 1)) * np.sum((avg_ranks - (k + 1) / 2.0) ** 2)
    )
    chi_square_p = float(chi2.sf(chi_square, k - 1))

    scale = np.sqrt(k * (k + 1) / (6.0 * n_datasets))
    z_scores = (avg_ranks - avg_ranks[control]) / scale
    raw_p = 2.0 * norm.sf(np.abs(z_scores))
    raw_p = np.minimum(raw_p, 1.0)
    z_scores[control] = np.nan
    raw_p[control] = np.nan

    adjusted_p = np.full(k, np.nan)
    others = [j for j in range(k) if j != control]
    order = sorted(others, key=lambda j: raw_p[j])
    running_max = 0.0
    for i, j in enumerate(order, start=1):
        adj = 1.0 - (1.0 - raw_p[j]) ** ((k - 1) / i)
        running_max = max(running_max, adj)
        adjusted_p[j] = min(1.0, running_max)

    return FriedmanFinnerResult(
        avg_ranks=avg_ranks,
        z_scores=z_scores,
        raw_p=raw_p,
        adjusted_p=adjusted_p,
        chi_square=chi_square,
        chi_square_p=chi_square_p,
        control=control,
    )
