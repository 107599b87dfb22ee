"""Per-scene precision, recall, and F-measure against frame-level ground truth."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInputError
from .scene import FrameLabel


@dataclass(frozen=True)
class SceneScore:
    """Counts and derived fractions for one scene.

    ``degenerate`` names the fractions whose denominator was zero and were
    therefore reported as 0 instead of raising, so an all-unknown prediction
    still yields a complete report.
    """

    scene: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_measure: float
    degenerate: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalReport:
    scenes: tuple[SceneScore, ...]
    macro_average_f: float


def score_from_counts(scene: str, tp: int, fp: int, fn: int) -> SceneScore:
    """P = TP/(TP+FP), R = TP/(TP+FN), FM = 2PR/(P+R); zero denominators flag."""
    degenerate = []
    precision = recall = f_measure = 0.0
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        degenerate.append("precision")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        degenerate.append("recall")
    if precision + recall > 0:
        f_measure = 2.0 * precision * recall / (precision + recall)
    else:
        degenerate.append("f_measure")
    return SceneScore(scene, tp, fp, fn, precision, recall, f_measure, tuple(degenerate))


def _label_map(pairs: list[tuple[str, str]], what: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for frame_id, label in pairs:
        if frame_id in mapping:
            raise InvalidInputError(f"duplicate frame_id {frame_id!r} in {what}")
        mapping[frame_id] = label
    return mapping


def evaluate_scene(
    predicted: list[FrameLabel],
    truth: list[tuple[str, str]],
    scene: str,
) -> SceneScore:
    """Frame-level TP/FP/FN of one scene given ground-truth (frame_id, label) pairs.

    The predicted and truth frame-id sets must be identical; a mismatch lists
    the ids missing from each side.
    """
    pred = _label_map([(fl.frame_id, fl.label) for fl in predicted], "predictions")
    true = _label_map(truth, "truth")
    missing_in_truth = sorted(set(pred) - set(true))
    missing_in_pred = sorted(set(true) - set(pred))
    if missing_in_truth or missing_in_pred:
        raise InvalidInputError(
            "frame sets differ; "
            f"missing from truth: {missing_in_truth or 'none'}, "
            f"missing from predictions: {missing_in_pred or 'none'}"
        )
    tp = sum(1 for fid in pred if pred[fid] == scene and true[fid] == scene)
    fp = sum(1 for fid in pred if pred[fid] == scene and true[fid] != scene)
    fn = sum(1 for fid in pred if true[fid] == scene and pred[fid] != scene)
    return score_from_counts(scene, tp, fp, fn)


def summary_report(scores: list[SceneScore]) -> EvalReport:
    """Macro-average the per-scene F-measures (unweighted mean)."""
    if not scores:
        raise InvalidInputError("summary_report needs at least one scene score")
    macro = sum(s.f_measure for s in scores) / len(scores)
    return EvalReport(scenes=tuple(scores), macro_average_f=macro)


def format_report(report: EvalReport) -> str:
    """Aligned text table; fractions displayed at two decimals, counts as-is."""
    headers = ("Scene", "TP", "FN", "FP", "Precision", "Recall", "F-Measure")
    rows = [
        (s.scene, str(s.tp), str(s.fn), str(s.fp),
         f"{s.precision:.2f}", f"{s.recall:.2f}", f"{s.f_measure:.2f}")
        for s in report.scenes
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) if i == 0 else h.rjust(widths[i])
                       for i, h in enumerate(headers))]
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) if i == 0 else r[i].rjust(widths[i])
                               for i in range(len(headers))))
    lines.append(f"Macro average F-Measure: {report.macro_average_f:.2f}")
    return "\n".join(lines)


def report_to_dict(report: EvalReport) -> dict:
    """Full-precision structured form of the report."""
    return {
        "scenes": {
            s.scene: {
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
                "precision": s.precision,
                "recall": s.recall,
                "f_measure": s.f_measure,
                "degenerate": list(s.degenerate),
            }
            for s in report.scenes
        },
        "macro_average_f": report.macro_average_f,
    }
