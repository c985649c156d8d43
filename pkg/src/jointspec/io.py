"""JSON input documents and deterministic CSV/SVG writers.

Input format::

    {
      "dim": 2,
      "field": "real",
      "group": {"kind": "GL"},              # or "SL", or {"kind": "PRODUCT", "blocks": 2}
      "generators": [{"label": "a", "entries": [[2, 1], [3, 2]]}, ...],
      "weights": [0.5, 0.5],                # optional
      "scenario": "fig5"                    # optional
    }

CSV columns, in this order: scenario, level, kind, mode, x, y, word.
Floats are written with 12 significant digits.
"""
from dataclasses import dataclass, field
import csv
import hashlib
import io as _io
import json
import math

import numpy as np

from .errors import ParseError, ValidationError
from .matgroup import GroupFrame

FLOAT_FMT = "{:.12g}"
SVG_SIZE = 800
SVG_MAX_POINTS = 20000


@dataclass
class InputDocument:
    dim: int
    generators: list
    labels: list
    frame: GroupFrame
    weights: np.ndarray = None
    scenario: str = None
    field: str = "real"

    def canonical(self):
        """JSON-able form with exact float encoding, used for hashing."""
        return {
            "dim": self.dim, "field": self.field, "frame": self.frame.to_dict(),
            "labels": list(self.labels),
            "generators": [[float(x).hex() for x in np.asarray(g).ravel()]
                           for g in self.generators],
            "weights": None if self.weights is None else [float(w).hex() for w in self.weights],
        }

    def content_hash(self):
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _fail(msg):
    raise ValidationError(msg)


def parse_input(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(raw, dict):
        _fail("document must be a JSON object")
    d = raw.get("dim")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        _fail("dim must be a positive integer")
    fld = raw.get("field", "real")
    if fld != "real":
        _fail("field must be 'real'")
    grp = raw.get("group", {"kind": "GL"})
    kind = grp.get("kind", "GL") if isinstance(grp, dict) else grp
    if kind == "GL":
        frame = GroupFrame.GL(d)
    elif kind == "SL":
        frame = GroupFrame.SL(d)
    elif kind == "PRODUCT":
        nb = grp.get("blocks")
        if not isinstance(nb, int) or 2 * nb != d:
            _fail("PRODUCT groups need blocks with dim = 2 * blocks")
        frame = GroupFrame.product(nb)
    else:
        _fail(f"unknown group kind {kind!r}")
    gens = raw.get("generators")
    if not isinstance(gens, list) or not gens:
        _fail("generators must be a non-empty list")
    mats, labels = [], []
    for i, g in enumerate(gens):
        if not isinstance(g, dict) or "entries" not in g:
            _fail(f"generator {i} needs entries")
        label = str(g.get("label", f"g{i}"))
        try:
            M = np.array(g["entries"], dtype=np.float64)
        except (TypeError, ValueError):
            _fail(f"entries of {label} are not numeric")
        if M.shape != (d, d):
            _fail(f"entries of {label} have shape {M.shape}, expected ({d}, {d})")
        if not np.all(np.isfinite(M)):
            _fail(f"entries of {label} are not finite")
        if frame.kind == "PRODUCT":
            mask = np.kron(np.eye(frame.nblocks), np.ones((2, 2)))
            if np.any(M[mask == 0] != 0):
                _fail(f"{label} is not block diagonal")
        mats.append(M)
        labels.append(label)
    if len(set(labels)) != len(labels):
        _fail("generator labels must be unique")
    w = raw.get("weights")
    if w is not None:
        w = np.array(w, dtype=np.float64)
        if w.shape != (len(mats),) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            _fail("weights must be a probability vector over the generators")
    return InputDocument(d, mats, labels, frame, w, raw.get("scenario"), fld)


def fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return FLOAT_FMT.format(x)


@dataclass
class PlotLayer:
    """Points and/or a closed polyline sharing one style."""
    name: str
    points: np.ndarray = None
    polygon: np.ndarray = None
    color: str = "#1f77b4"
    radius: float = 1.5
    closed: bool = True


def write_csv(path, scenario, rows):
    """rows: iterables of (level, kind, mode, x, y, word)."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "level", "kind", "mode", "x", "y", "word"])
    for level, kind, mode, x, y, word in rows:
        w.writerow([scenario, level, kind, mode, fmt(x), fmt(y), word])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def cloud_rows(cloud, labels=None):
    xy = cloud.xy
    for i in range(len(xy)):
        word = cloud.word(i)
        if word is None:
            ws = ""
        elif labels:
            ws = ".".join(labels[c] for c in word)
        else:
            ws = "".join(str(c) for c in word)
        yield cloud.level, cloud.kind, cloud.mode, xy[i, 0], xy[i, 1], ws


def _thin(P, k):
    if P is None or len(P) <= k:
        return P
    idx = np.linspace(0, len(P) - 1, k).round().astype(np.int64)
    return P[idx]


def write_svg(path, layers, title=""):
    """Scatter plus polylines in a fixed 800x800 viewBox.  Large point sets
    are thinned deterministically to at most 20000 points per layer."""
    allp = [l.points for l in layers if l.points is not None and len(l.points)]
    allp += [l.polygon for l in layers if l.polygon is not None and len(l.polygon)]
    P = np.vstack(allp) if allp else np.zeros((1, 2))
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = float(max((hi - lo).max(), 1e-12))
    pad = 40.0
    scale = (SVG_SIZE - 2 * pad) / span

    def tx(q):
        q = np.atleast_2d(q)
        X = pad + (q[:, 0] - lo[0]) * scale
        Y = SVG_SIZE - pad - (q[:, 1] - lo[1]) * scale
        return X, Y

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
           f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
           f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>']
    if title:
        out.append(f'<text x="{pad}" y="24" font-family="monospace" font-size="14">{title}</text>')
    for layer in layers:
        out.append(f'<g id="{layer.name}">')
        pts = _thin(layer.points, SVG_MAX_POINTS)
        if pts is not None and len(pts):
            X, Y = tx(pts)
            for x, y in zip(X, Y):
                out.append(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="{fmt(layer.radius)}" '
                           f'fill="{layer.color}"/>')
        if layer.polygon is not None and len(layer.polygon):
            X, Y = tx(layer.polygon)
            coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in zip(X, Y))
            tag = "polygon" if layer.closed and len(layer.polygon) > 2 else "polyline"
            out.append(f'<{tag} points="{coords}" fill="none" stroke="{layer.color}" '
                       f'stroke-width="2"/>')
        out.append("</g>")
    out.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
