"""Score discretization, conversion curves, and report assembly.

Scores are discretized into five equal-frequency levels; the conversion
probability of a level is the exact fraction of its pairs exhibiting a
behavior.  Reports are plot-ready TSV files; rendering is left to external
tools.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

N_LEVELS = 5


@dataclass(frozen=True)
class LevelBinning:
    name: str
    cuts: tuple            # 4 level-maximum values
    counts: tuple          # 5 pair counts, sum == len(levels)
    levels: np.ndarray     # level (1..5) of every input score

    @property
    def empty_levels(self) -> tuple:
        return tuple(lv for lv, c in enumerate(self.counts, start=1) if c == 0)

    def level_of(self, score: float) -> int:
        return 1 + int(sum(c < score for c in self.cuts))


def discretize(scores, name: str = "score") -> LevelBinning:
    """Equal-frequency binning into 5 levels.

    Boundaries fall between distinct values only: a run of tied scores is
    assigned wholly to the lower level, so level populations are equal within
    the spill caused by ties.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    if n < N_LEVELS:
        raise ParameterError(f"need at least {N_LEVELS} scores, got {n}")
    order = np.argsort(scores, kind="stable")
    s = scores[order]

    bounds = [0]
    for k in range(1, N_LEVELS):
        b = max(k * n // N_LEVELS, bounds[-1])
        while 0 < b < n and s[b] == s[b - 1]:
            b += 1
        bounds.append(b)
    bounds.append(n)

    levels_sorted = np.empty(n, dtype=np.int64)
    counts = []
    cuts = []
    for lv in range(N_LEVELS):
        lo, hi = bounds[lv], bounds[lv + 1]
        levels_sorted[lo:hi] = lv + 1
        counts.append(hi - lo)
        if lv < N_LEVELS - 1:
            cuts.append(float(s[hi - 1]) if hi > 0 else float("-inf"))

    levels = np.empty(n, dtype=np.int64)
    levels[order] = levels_sorted
    return LevelBinning(name, tuple(cuts), tuple(counts), levels)


@dataclass(frozen=True)
class ConversionCurve:
    name: str
    behavior: str
    counts: tuple     # pairs per level
    positives: tuple  # positive pairs per level
    values: tuple     # positive fraction per level, 0.0 where absent
    present: tuple    # False for levels with zero pairs


def conversion_curve(binning: LevelBinning, labels, behavior: str = "adoption") -> ConversionCurve:
    """Exact per-level positive fraction of behavior labels."""
    labels = np.asarray(labels)
    if len(labels) != len(binning.levels):
        raise ParameterError(
            f"{len(labels)} labels for {len(binning.levels)} scored pairs")
    counts, positives, values, present = [], [], [], []
    for lv in range(1, N_LEVELS + 1):
        mask = binning.levels == lv
        c = int(mask.sum())
        p = int(labels[mask].sum())
        counts.append(c)
        positives.append(p)
        values.append(p / c if c else 0.0)
        present.append(c > 0)
    return ConversionCurve(binning.name, behavior, tuple(counts),
                           tuple(positives), tuple(values), tuple(present))


@dataclass(frozen=True)
class RepetitionResult:
    """Metrics and feature importance from one seeded repetition."""
    metrics: dict
    importance: dict


def _mean_over(dicts) -> dict:
    keys = []
    for d in dicts:
        for k in d:
            if k not in keys:
                keys.append(k)
    out = {}
    for k in keys:
        vals = [d.get(k, 0.0) for d in dicts]
        # identical repetitions must yield the identical mean, bit for bit
        out[k] = float(vals[0]) if len(set(vals)) == 1 else float(np.mean(vals))
    return out


def write_report(out_dir, repetitions, curves, ccsize=None,
                 manifest_name: str | None = None) -> dict:
    """Assemble the analysis bundle in out_dir.

    Emits metrics.tsv (per-repetition values and their mean), importance.tsv
    (mean split-frequency importance), one conversion_<measure>_<behavior>.tsv
    per curve, and ccsize_hist.tsv when a component-size distribution is
    given.  Returns the paths written.
    """
    if not repetitions:
        raise ParameterError("report requires at least one repetition result")
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    head = f"# manifest: {manifest_name}\n" if manifest_name else ""

    path = os.path.join(out_dir, "metrics.tsv")
    mean_metrics = _mean_over([r.metrics for r in repetitions])
    with open(path, "w", encoding="utf-8") as f:
        f.write(head)
        reps = "\t".join(f"rep{i+1}" for i in range(len(repetitions)))
        f.write(f"metric\t{reps}\tmean\n")
        for k, mv in mean_metrics.items():
            vals = "\t".join(repr(float(r.metrics.get(k, 0.0))) for r in repetitions)
            f.write(f"{k}\t{vals}\t{repr(mv)}\n")
    written["metrics"] = path

    path = os.path.join(out_dir, "importance.tsv")
    mean_imp = _mean_over([r.importance for r in repetitions])
    with open(path, "w", encoding="utf-8") as f:
        f.write(head)
        f.write("feature\timportance\n")
        for k in sorted(mean_imp, key=lambda k: (-mean_imp[k], k)):
            f.write(f"{k}\t{repr(mean_imp[k])}\n")
    written["importance"] = path

    for curve in curves:
        fname = f"conversion_{curve.name}_{curve.behavior}.tsv"
        path = os.path.join(out_dir, fname)
        with open(path, "w", encoding="utf-8") as f:
            f.write(head)
            f.write("level\tcount\tpositives\tfraction\tpresent\n")
            for lv in range(N_LEVELS):
                f.write(f"{lv+1}\t{curve.counts[lv]}\t{curve.positives[lv]}\t"
                        f"{repr(curve.values[lv])}\t{int(curve.present[lv])}\n")
        written[fname] = path

    if ccsize is not None:
        path = os.path.join(out_dir, "ccsize_hist.tsv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(head)
            f.write("bin_lo\tbin_hi\tcount\n")
            for i, c in enumerate(ccsize.counts):
                f.write(f"{repr(float(ccsize.bin_edges[i]))}\t"
                        f"{repr(float(ccsize.bin_edges[i+1]))}\t{int(c)}\n")
        written["ccsize_hist"] = path

    return written
