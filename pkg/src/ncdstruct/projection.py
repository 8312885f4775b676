"""2D embedding of a distance matrix for visual validation.

Classical metric scaling: square the distances, double-center, and keep the
two leading spectral axes. Exactly-embeddable inputs are recovered up to a
rigid transform; for everything else the residual is reported as a stress
value. The silhouette here is the classical Euclidean one (nearest foreign
cluster), which differs on purpose from the pooled dendrogram variant in
the metrics module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, UndefinedDistanceError
from .ncd import DistanceMatrix

_GLYPHS = ("circle", "square", "diamond", "triangle", "cross")
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e")


@dataclass
class Projection2D:
    points: list[tuple[str, str, float, float]]  # (id, class_label, x, y)
    stress: float

    def coords(self) -> np.ndarray:
        return np.array([[x, y] for _, _, x, y in self.points])


def mds_project(m: DistanceMatrix, labels: dict[str, str] | None = None) -> Projection2D:
    """Top-2 spectral embedding of the double-centered squared distances."""
    n = len(m.ids)
    if n < 3:
        raise InputError(f"projection needs at least 3 points, got {n}")
    if not np.array_equal(m.values, m.values.T):
        raise InputError("distance matrix must be symmetric")
    labels = labels or {}
    d2 = np.asarray(m.values, dtype=float) ** 2
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * centering @ d2 @ centering
    eigvals, eigvecs = np.linalg.eigh(gram)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    scale = max(1.0, float(np.abs(gram).max()))
    coords = np.zeros((n, 2))
    if eigvals[0] <= 1e-12 * scale:
        warnings.warn("degenerate distance matrix: projecting all points to the origin",
                      stacklevel=2)
    else:
        for axis in range(2):
            if eigvals[axis] > 1e-12 * scale:
                coords[:, axis] = eigvecs[:, axis] * math.sqrt(eigvals[axis])
        # sign convention: first nonzero coordinate of each axis positive
        for axis in range(2):
            col = coords[:, axis]
            nonzero = np.nonzero(np.abs(col) > 1e-12)[0]
            if nonzero.size and col[nonzero[0]] < 0:
                coords[:, axis] = -col
    delta = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2))
    denom = float((m.values ** 2).sum())
    stress = math.sqrt(float(((m.values - delta) ** 2).sum()) / denom) if denom else 0.0
    points = [
        (doc_id, labels.get(doc_id, ""), float(coords[i, 0]), float(coords[i, 1]))
        for i, doc_id in enumerate(m.ids)
    ]
    return Projection2D(points=points, stress=stress)


def silhouette_euclidean(p: Projection2D) -> float:
    """Classical silhouette over the projected points."""
    ids = [pid for pid, _, _, _ in p.points]
    labels = {pid: label for pid, label, _, _ in p.points}
    classes = sorted(set(labels.values()))
    if len(classes) < 2:
        raise UndefinedDistanceError("silhouette needs at least two classes")
    coords = p.coords()
    index = {pid: i for i, pid in enumerate(ids)}
    dist = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2))
    scores = []
    for pid in ids:
        i = index[pid]
        same = [index[o] for o in ids if o != pid and labels[o] == labels[pid]]
        if not same:
            scores.append(0.0)
            continue
        a = float(dist[i, same].mean())
        b = min(
            float(dist[i, [index[o] for o in ids if labels[o] == cl]].mean())
            for cl in classes
            if cl != labels[pid]
        )
        if a == b == 0.0:
            scores.append(0.0)
        else:
            scores.append((b - a) / max(a, b))
    return float(sum(scores) / len(scores))


def _svg_marker(glyph: str, x: float, y: float, color: str) -> str:
    r = 4.0
    if glyph == "circle":
        return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>'
    if glyph == "square":
        return (f'<rect x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r}" '
                f'height="{2 * r}" fill="{color}"/>')
    if glyph == "diamond":
        pts = f"{x:.2f},{y - r:.2f} {x + r:.2f},{y:.2f} {x:.2f},{y + r:.2f} {x - r:.2f},{y:.2f}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    if glyph == "triangle":
        pts = f"{x:.2f},{y - r:.2f} {x + r:.2f},{y + r:.2f} {x - r:.2f},{y + r:.2f}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    return (f'<path d="M {x - r:.2f} {y - r:.2f} L {x + r:.2f} {y + r:.2f} '
            f'M {x - r:.2f} {y + r:.2f} L {x + r:.2f} {y - r:.2f}" '
            f'stroke="{color}" stroke-width="2"/>')


def emit_plot(p: Projection2D, path: str | Path) -> tuple[Path, Path]:
    """Write <path>.csv and <path>.svg; identical input gives identical bytes."""
    for pid, label, _, _ in p.points:
        if not label:
            raise InputError(f"point {pid!r} has an empty class label")
    base = Path(path)
    csv_path = base.with_suffix(".csv")
    svg_path = base.with_suffix(".svg")
    lines = ["id,label,x,y"]
    for pid, label, x, y in p.points:
        lines.append(f"{pid},{label},{x:.6f},{y:.6f}")
    csv_path.write_text("\n".join(lines) + "\n")

    width = height = 480.0
    margin = 40.0
    xs = [x for _, _, x, _ in p.points]
    ys = [y for _, _, _, y in p.points]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
    scale = (width - 2 * margin) / span

    def sx(x: float) -> float:
        return margin + (x - min(xs)) * scale

    def sy(y: float) -> float:
        return height - margin - (y - min(ys)) * scale

    classes = sorted({label for _, label, _, _ in p.points})
    style = {
        label: (_GLYPHS[i % len(_GLYPHS)], _COLORS[i % len(_COLORS)])
        for i, label in enumerate(classes)
    }
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
    ]
    for i, label in enumerate(classes):
        glyph, color = style[label]
        svg.append(_svg_marker(glyph, margin + 8, margin + 16 * i, color))
        svg.append(
            f'<text x="{margin + 18:.2f}" y="{margin + 16 * i + 4:.2f}" '
            f'font-size="11" font-family="sans-serif">{label}</text>'
        )
    for pid, label, x, y in p.points:
        glyph, color = style[label]
        svg.append(_svg_marker(glyph, sx(x), sy(y), color))
    svg.append("</svg>")
    svg_path.write_text("\n".join(svg) + "\n")
    return csv_path, svg_path
