"""SVG pictures of the pillowcase: curves, generators and shaded bigons.

The pillowcase is drawn unrolled on the fundamental domain [0, pi] x [0, 2pi]
with the fold edges gamma = 0 and gamma = pi marked.
"""
from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import shapely  # noqa: E402
from shapely.geometry import Polygon  # noqa: E402

from .pillowcase import TWO_PI, DeckElement, canonicalize  # noqa: E402

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def fold_polyline(pts: np.ndarray) -> list[np.ndarray]:
    """Fold a lifted polyline into the fundamental domain, split at the seams."""
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return []
    # refine so each piece crosses at most one seam between samples
    fine = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil(np.linalg.norm(b - a) / 0.05)))
        fine.extend(a + (b - a) * (i / k) for i in range(1, k + 1))
    folded = np.array([canonicalize(p)[0] for p in fine])
    pieces, start = [], 0
    for i in range(1, len(folded)):
        if np.linalg.norm(folded[i] - folded[i - 1]) > 0.5:
            pieces.append(folded[start:i])
            start = i
    pieces.append(folded[start:])
    return [p for p in pieces if len(p) > 1]


def _domain_images(bounds) -> list[tuple[DeckElement, Polygon]]:
    """Deck images g.D of D = [0, pi] x [0, 2pi] meeting the bounding box."""
    x0, y0, x1, y1 = bounds
    out = []
    for sigma in (1, -1):
        for m in range(math.floor(x0 / TWO_PI) - 1, math.floor(x1 / TWO_PI) + 2):
            for n in range(math.floor(y0 / TWO_PI) - 1, math.floor(y1 / TWO_PI) + 2):
                g = DeckElement(m, n, sigma)
                corners = g.apply(np.array([[0, 0], [math.pi, 0], [math.pi, TWO_PI], [0, TWO_PI]]))
                out.append((g, Polygon(corners)))
    return out


def fold_region(loop: np.ndarray) -> list[np.ndarray]:
    """Pieces of the region bounded by a lifted loop, mapped into the domain."""
    poly = shapely.make_valid(Polygon(loop))
    pieces = []
    for g, dom in _domain_images(poly.bounds):
        part = poly.intersection(dom)
        if part.is_empty or part.area < 1e-12:
            continue
        geoms = getattr(part, "geoms", [part])
        ginv = g.inverse()
        for geom in geoms:
            if isinstance(geom, Polygon) and geom.area > 1e-12:
                pieces.append(ginv.apply(np.asarray(geom.exterior.coords)))
    return pieces


def render_svg(L0, L1_components, complex_=None, title: str = "", path=None) -> str:
    """Draw the picture and return the SVG text (also written to ``path`` if given)."""
    fig, ax = plt.subplots(figsize=(4.2, 7.6))
    ax.add_patch(plt.Rectangle((0, 0), math.pi, TWO_PI, fill=False, lw=0.8, color="0.4"))
    ax.axhline(math.pi, color="0.75", lw=0.6, ls=":")
    for x in (0.0, math.pi):
        ax.plot([x, x], [0, TWO_PI], color="0.2", lw=2.0, solid_capstyle="butt")
    corners = [(0, 0), (math.pi, 0), (0, math.pi), (math.pi, math.pi), (0, TWO_PI), (math.pi, TWO_PI)]
    ax.scatter(*zip(*corners), marker="s", s=22, color="black", zorder=5)
    if complex_ is not None:
        for comp in complex_.components:
            for b in comp.bigons:
                for piece in fold_region(b.boundary_loop):
                    ax.fill(piece[:, 0], piece[:, 1], color="#f4c542", alpha=0.45, lw=0, zorder=1)
    if L0 is not None:
        for piece in fold_polyline(L0.vertices):
            ax.plot(piece[:, 0], piece[:, 1], color="0.35", lw=1.0, zorder=2)
    for i, c in enumerate(L1_components):
        for piece in fold_polyline(c.vertices):
            ax.plot(piece[:, 0], piece[:, 1], color=_COLORS[i % len(_COLORS)], lw=1.3, zorder=3)
    if complex_ is not None:
        for comp in complex_.components:
            for lab, g in zip(comp.labels, comp.generators):
                x, y = g.point.gamma, g.point.theta
                ax.scatter([x], [y], s=12, color="black", zorder=6)
                short = lab.split(".", 1)[-1]
                ax.annotate(f"{short} ({comp.degree(lab)})", (x, y), fontsize=5, xytext=(3, 2),
                            textcoords="offset points", zorder=7)
    ax.set_xlim(-0.15, math.pi + 0.15)
    ax.set_ylim(-0.15, TWO_PI + 0.15)
    ax.set_aspect("equal")
    ax.set_xticks([0, math.pi], ["0", "π"])
    ax.set_yticks([0, math.pi, TWO_PI], ["0", "π", "2π"])
    ax.set_xlabel("γ")
    ax.set_ylabel("θ")
    if title:
        ax.set_title(title, fontsize=8)
    buf = io.StringIO()
    plt.rcParams["svg.hashsalt"] = "pillowfloer"
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text

