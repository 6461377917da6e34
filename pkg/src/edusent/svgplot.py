"""Static SVG figures: ROC curves, confusion matrices, sensitivity bars.

Hand-assembled markup so reports need no plotting dependency. Output is
deterministic (fixed float formatting) and structurally testable as XML.
"""

from __future__ import annotations

from typing import Sequence

from .evalmetrics import ConfusionMatrix, RocCurve

_W, _H = 480, 360
_MARGIN = 48


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _header(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{_esc(title)}</text>',
    ]


def _plot_xy(x: float, y: float) -> tuple[float, float]:
    """Map unit-square data coordinates into the drawing area."""
    px = _MARGIN + x * (_W - 2 * _MARGIN)
    py = (_H - _MARGIN) - y * (_H - 2 * _MARGIN)
    return px, py


def roc_curve_svg(curve: RocCurve, title: str = "ROC curve") -> str:
    parts = _header(f"{title} (AUC = {curve.auc:.4f})")
    x0, y0 = _plot_xy(0.0, 0.0)
    x1, y1 = _plot_xy(1.0, 1.0)
    parts.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x1:.1f}" y2="{y0:.1f}" stroke="black"/>')
    parts.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x0:.1f}" y2="{y1:.1f}" stroke="black"/>')
    parts.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x1:.1f}" y2="{y1:.1f}" '
                 f'stroke="gray" stroke-dasharray="4 4"/>')
    pts = " ".join(
        "{:.2f},{:.2f}".format(*_plot_xy(fx, fy)) for fx, fy in curve.points
    )
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" stroke-width="2"/>')
    parts.append(f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
                 f'font-size="12" font-family="sans-serif">false positive rate</text>')
    parts.append(f'<text x="14" y="{_H / 2:.1f}" text-anchor="middle" font-size="12" '
                 f'font-family="sans-serif" transform="rotate(-90 14 {_H / 2:.1f})">'
                 f'true positive rate</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def confusion_matrix_svg(cm: ConfusionMatrix, title: str = "Confusion matrix") -> str:
    parts = _header(title)
    cell = 110
    ox = (_W - 2 * cell) / 2
    oy = 70
    total = max(cm.total, 1)
    layout = [
        (0, 0, cm.tp, "TP"), (1, 0, cm.fn, "FN"),
        (0, 1, cm.fp, "FP"), (1, 1, cm.tn, "TN"),
    ]
    for col, row, count, tag in layout:
        shade = 235 - int(175 * count / total)
        x = ox + col * cell
        y = oy + row * cell
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{cell}" height="{cell}" '
                     f'fill="rgb({shade},{shade},255)" stroke="black"/>')
        parts.append(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 - 6:.1f}" '
                     f'text-anchor="middle" font-size="13" font-family="sans-serif">{tag}</text>')
        parts.append(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 14:.1f}" '
                     f'text-anchor="middle" font-size="16" font-family="sans-serif">{count}</text>')
    labels = [
        (ox + 0.5 * cell, oy - 12, "predicted Positive"),
        (ox + 1.5 * cell, oy - 12, "predicted Negative"),
        (ox - 14, oy + 0.5 * cell, "actual Positive"),
        (ox - 14, oy + 1.5 * cell, "actual Negative"),
    ]
    for i, (x, y, text) in enumerate(labels):
        rot = f' transform="rotate(-90 {x:.1f} {y:.1f})"' if i >= 2 else ""
        parts.append(f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="middle" font-size="11" '
                     f'font-family="sans-serif"{rot}>{text}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def sensitivity_bars_svg(
    rows: Sequence[tuple],
    title: str = "Sentence sensitivity",
) -> str:
    """Grouped bars, one pair (LR, RNN) of positive probabilities per sentence.

    rows are (sentence_id, text, lr_prob, rnn_prob).
    """
    parts = _header(title)
    n = max(len(rows), 1)
    area_w = _W - 2 * _MARGIN
    area_h = _H - 2 * _MARGIN - 20
    base_y = _H - _MARGIN - 20
    group_w = area_w / n
    bar_w = group_w * 0.3
    parts.append(f'<line x1="{_MARGIN}" y1="{base_y:.1f}" x2="{_W - _MARGIN}" '
                 f'y2="{base_y:.1f}" stroke="black"/>')
    half_y = base_y - 0.5 * area_h
    parts.append(f'<line x1="{_MARGIN}" y1="{half_y:.1f}" x2="{_W - _MARGIN}" '
                 f'y2="{half_y:.1f}" stroke="gray" stroke-dasharray="3 5"/>')
    parts.append(f'<text x="{_MARGIN - 6}" y="{half_y + 4:.1f}" text-anchor="end" '
                 f'font-size="10" font-family="sans-serif">0.5</text>')
    for j, (sid, _text, lr_p, rnn_p) in enumerate(rows):
        gx = _MARGIN + j * group_w + group_w / 2
        for off, p, color in ((-bar_w, lr_p, "#c05640"), (0.0, rnn_p, "#1f6fb2")):
            h = p * area_h
            parts.append(f'<rect x="{gx + off:.1f}" y="{base_y - h:.1f}" '
                         f'width="{bar_w:.1f}" height="{h:.1f}" fill="{color}"/>')
        parts.append(f'<text x="{gx:.1f}" y="{base_y + 14:.1f}" text-anchor="middle" '
                     f'font-size="10" font-family="sans-serif">{_esc(str(sid))}</text>')
    parts.append(f'<rect x="{_MARGIN}" y="{_H - 26}" width="10" height="10" fill="#c05640"/>')
    parts.append(f'<text x="{_MARGIN + 14}" y="{_H - 17}" font-size="10" '
                 f'font-family="sans-serif">LR p(positive)</text>')
    parts.append(f'<rect x="{_MARGIN + 110}" y="{_H - 26}" width="10" height="10" fill="#1f6fb2"/>')
    parts.append(f'<text x="{_MARGIN + 124}" y="{_H - 17}" font-size="10" '
                 f'font-family="sans-serif">RNN p(positive)</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
