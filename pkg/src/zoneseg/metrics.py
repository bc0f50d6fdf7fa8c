"""Evaluation and inter-annotator agreement measures.

``evaluate`` pools all lines of all emails and reports micro (global)
accuracy, a gold-rows/predicted-columns confusion matrix, and per-zone
recall/precision/F1 with explicit zero-denominator conventions: any
score with an empty denominator is 0, and zones never seen in gold are
reported with support 0. The macro F1 averages over zones with positive
gold support, so perfect predictions score 1.0 even when some zones are
unused.

``cohens_kappa`` is the chance-corrected agreement
(p_o - p_e) / (1 - p_e) with p_e taken from each annotator's own label
frequencies. Agreement reports carry two F1 numbers because macro F1 is
asymmetric in which annotator is treated as the reference; macro is the
default and micro (which equals pooled accuracy for single-label lines)
is available behind ``f1_average="micro"``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .emails import AnnotatedEmail, Taxonomy
from .exceptions import ValidationError


@dataclass(frozen=True)
class ZoneScores:
    recall: float
    precision: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    taxonomy_name: str
    zones: tuple[str, ...]
    n_lines: int
    accuracy: float
    per_zone: dict[str, ZoneScores]
    macro_f1: float
    confusion: np.ndarray  # (K, K) counts, rows gold, columns predicted
    f1_average: str

    def to_json_dict(self) -> dict:
        return {
            "taxonomy": self.taxonomy_name,
            "n_lines": self.n_lines,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "f1_average": self.f1_average,
            "per_zone": {
                z: {
                    "recall": s.recall,
                    "precision": s.precision,
                    "f1": s.f1,
                    "support": s.support,
                }
                for z, s in self.per_zone.items()
            },
            "confusion": self.confusion.tolist(),
            "zones": list(self.zones),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, indent=2)


@dataclass(frozen=True)
class AgreementReport:
    n_lines: int
    accuracy: float
    f1_a1a2: float
    f1_a2a1: float
    kappa: float
    f1_average: str

    def to_json_dict(self) -> dict:
        return {
            "n_lines": self.n_lines,
            "accuracy": self.accuracy,
            "f1_a1a2": self.f1_a1a2,
            "f1_a2a1": self.f1_a2a1,
            "kappa": self.kappa,
            "f1_average": self.f1_average,
        }


def _pair_by_id(
    gold: Sequence[AnnotatedEmail], pred: Sequence[AnnotatedEmail]
) -> list[tuple[AnnotatedEmail, AnnotatedEmail]]:
    gold_map = {a.email.id: a for a in gold}
    pred_map = {a.email.id: a for a in pred}
    missing = sorted(set(gold_map) - set(pred_map))
    extra = sorted(set(pred_map) - set(gold_map))
    if missing or extra:
        raise ValidationError(
            f"email id sets differ (missing from predictions: {missing[:5]}, "
            f"unexpected: {extra[:5]})"
        )
    pairs = []
    for email_id in gold_map:
        g, p = gold_map[email_id], pred_map[email_id]
        if len(g.zones) != len(p.zones):
            raise ValidationError(
                f"email {email_id!r}: gold has {len(g.zones)} lines, "
                f"predictions have {len(p.zones)}"
            )
        pairs.append((g, p))
    return pairs


def confusion_matrix(
    gold: Sequence[AnnotatedEmail], pred: Sequence[AnnotatedEmail], taxonomy: Taxonomy
) -> np.ndarray:
    index = {z: i for i, z in enumerate(taxonomy.zones)}
    k = len(taxonomy.zones)
    counts = np.zeros((k, k), dtype=np.int64)
    for g, p in _pair_by_id(gold, pred):
        for gz, pz in zip(g.zones, p.zones):
            if gz not in index:
                raise ValidationError(
                    f"email {g.email.id!r}: gold zone {gz!r} not in taxonomy "
                    f"{taxonomy.name!r}"
                )
            if pz not in index:
                raise ValidationError(
                    f"email {p.email.id!r}: predicted zone {pz!r} not in taxonomy "
                    f"{taxonomy.name!r}"
                )
            counts[index[gz], index[pz]] += 1
    return counts


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def report_from_confusion(
    confusion: np.ndarray, taxonomy: Taxonomy, f1_average: str = "macro"
) -> EvalReport:
    n_lines = int(confusion.sum())
    if n_lines == 0:
        raise ValidationError("cannot evaluate zero lines")
    diag = np.diag(confusion)
    row_sums = confusion.sum(axis=1)
    col_sums = confusion.sum(axis=0)
    per_zone: dict[str, ZoneScores] = {}
    f1_with_support = []
    for i, zone in enumerate(taxonomy.zones):
        recall = _safe_div(float(diag[i]), float(row_sums[i]))
        precision = _safe_div(float(diag[i]), float(col_sums[i]))
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_zone[zone] = ZoneScores(
            recall=recall, precision=precision, f1=f1, support=int(row_sums[i])
        )
        if row_sums[i] > 0:
            f1_with_support.append(f1)
    accuracy = float(diag.sum()) / n_lines
    if f1_average == "macro":
        macro_f1 = float(np.mean(f1_with_support)) if f1_with_support else 0.0
    elif f1_average == "micro":
        macro_f1 = accuracy
    else:
        raise ValidationError(f"unknown f1_average {f1_average!r}")
    return EvalReport(
        taxonomy_name=taxonomy.name,
        zones=taxonomy.zones,
        n_lines=n_lines,
        accuracy=accuracy,
        per_zone=per_zone,
        macro_f1=macro_f1,
        confusion=confusion,
        f1_average=f1_average,
    )


def evaluate(
    gold: Sequence[AnnotatedEmail],
    pred: Sequence[AnnotatedEmail],
    taxonomy: Taxonomy,
    f1_average: str = "macro",
) -> EvalReport:
    """Line-level evaluation of predictions against gold annotations.

    Emails are paired by id (order does not matter); ids and per-email
    line counts must match exactly.
    """
    confusion = confusion_matrix(gold, pred, taxonomy)
    return report_from_confusion(confusion, taxonomy, f1_average)


def cohens_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    """Chance-corrected agreement between two label sequences."""
    if len(a) != len(b):
        raise ValidationError(f"label lists differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValidationError("cannot compute kappa of empty label lists")
    n = len(a)
    p_o = sum(x == y for x, y in zip(a, b)) / n
    freq_a = Counter(a)
    freq_b = Counter(b)
    p_e = sum(freq_a[label] / n * freq_b.get(label, 0) / n for label in freq_a)
    if p_e >= 1.0:
        # Both annotators constant on the same label; agreement is perfect.
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def agreement_report(a1: Corpus, a2: Corpus, f1_average: str = "macro") -> AgreementReport:
    """Pooled agreement between two annotators of the same emails."""
    if a1.taxonomy.name != a2.taxonomy.name:
        raise ValidationError(
            f"annotator corpora use different taxonomies: "
            f"{a1.taxonomy.name!r} vs {a2.taxonomy.name!r}"
        )
    pairs = _pair_by_id(a1.emails, a2.emails)
    labels_1: list[str] = []
    labels_2: list[str] = []
    for g, p in pairs:
        labels_1.extend(g.zones)
        labels_2.extend(p.zones)
    report_12 = evaluate(a1.emails, a2.emails, a1.taxonomy, f1_average)
    report_21 = evaluate(a2.emails, a1.emails, a1.taxonomy, f1_average)
    return AgreementReport(
        n_lines=len(labels_1),
        accuracy=report_12.accuracy,
        f1_a1a2=report_12.macro_f1,
        f1_a2a1=report_21.macro_f1,
        kappa=cohens_kappa(labels_1, labels_2),
        f1_average=f1_average,
    )


def render_eval_report(report: EvalReport) -> str:
    """Plain-text table: a global accuracy row, then one recall row per zone."""
    width = max([len("zone")] + [len(z) for z in report.zones])
    lines = [
        f"{'zone':<{width}}  {'recall':>7}  {'precision':>9}  {'f1':>7}  {'support':>7}",
        f"{'All':<{width}}  {report.accuracy:>7.2f}  {'':>9}  {report.macro_f1:>7.2f}  {report.n_lines:>7}",
    ]
    for zone in report.zones:
        s = report.per_zone[zone]
        lines.append(
            f"{zone:<{width}}  {s.recall:>7.2f}  {s.precision:>9.2f}  "
            f"{s.f1:>7.2f}  {s.support:>7}"
        )
    return "\n".join(lines)


def render_agreement_table(reports: dict[str, AgreementReport]) -> str:
    """Plain-text table with one column per group (language or 'all')."""
    groups = list(reports)
    width = max([len("measure")] + [len(g) for g in groups])
    rows = [
        ("accuracy", lambda r: r.accuracy),
        ("F1 A1A2", lambda r: r.f1_a1a2),
        ("F1 A2A1", lambda r: r.f1_a2a1),
        ("kappa", lambda r: r.kappa),
    ]
    header = f"{'measure':<10}  " + "  ".join(f"{g:>{width}}" for g in groups)
    lines = [header]
    for label, getter in rows:
        cells = "  ".join(f"{getter(reports[g]):>{width}.2f}" for g in groups)
        lines.append(f"{label:<10}  {cells}")
    return "\n".join(lines)
