"""Top-down SVG rendering of an episode log."""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from .dynamics import VesselParams
from .world import DockGeometry, corners_batch

PAD = 1.0  # [m] margin around the drawn content
SCALE = 40.0  # [px/m]
SNAPSHOT_PERIOD = 1.0  # [s]


class EmptyPlotError(ValueError):
    """The log has no rows to draw."""


def _snapshot_rows(t: np.ndarray, period: float) -> np.ndarray:
    """Indices of the first row at or after each multiple of ``period``."""
    marks = np.arange(0.0, t[-1] + 1e-9, period)
    idx = np.searchsorted(t, marks - 1e-9)
    return np.unique(idx[idx < len(t)])


def _entry_and_center(log: dict, dock: DockGeometry, d_entry: float):
    valid = np.flatnonzero(np.asarray(log.get("est_valid", []), dtype=float) > 0)
    if len(valid):
        i = valid[-1]
        return ((float(log["entry_x"][i]), float(log["entry_y"][i])),
                (float(log["dock_cx"][i]), float(log["dock_cy"][i])))
    c = np.asarray(dock.center, dtype=float)
    e = c - d_entry * dock.axis
    return (float(e[0]), float(e[1])), None


def emit_plot(log: dict, dock: DockGeometry, params: VesselParams | None = None, d_entry: float = 3.5) -> str:
    """Render ``log`` (column arrays as from ``read_log``) over the dock walls.

    Draws the walls, the trajectory polyline, vessel footprints once per
    simulated second, the entry point and the true and estimated dock
    centres. The estimated entry point comes from the last valid estimate in
    the log; without one it falls back to ``d_entry`` in front of the true
    centre.
    """
    params = params or VesselParams()
    x = np.asarray(log.get("x", []), dtype=float)
    if x.size == 0:
        raise EmptyPlotError("cannot plot an empty log")
    y = np.asarray(log["y"], dtype=float)
    t = np.asarray(log.get("t", np.arange(len(x))), dtype=float)
    psi = np.asarray(log.get("psi", np.zeros(len(x))), dtype=float)

    snaps = _snapshot_rows(t, SNAPSHOT_PERIOD)
    poses = np.stack([x[snaps], y[snaps], psi[snaps]], axis=1)
    feet = corners_batch(poses, params.length, params.width)
    walls = [w.rectangle() for w in dock.walls]
    entry, est_center = _entry_and_center(log, dock, d_entry)
    center = tuple(float(v) for v in dock.center)

    pts = [np.stack([x, y], axis=1), feet.reshape(-1, 2), *walls, np.array([entry, center])]
    if est_center is not None:
        pts.append(np.array([est_center]))
    allpts = np.concatenate(pts)
    lo = allpts.min(axis=0) - PAD
    hi = allpts.max(axis=0) + PAD
    w_px, h_px = (hi - lo) * SCALE

    def sx(px):
        return (px - lo[0]) * SCALE

    def sy(py):
        # SVG y grows downwards
        return (hi[1] - py) * SCALE

    def path(poly):
        return " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in poly)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px:.1f}" height="{h_px:.1f}" '
        f'viewBox="0 0 {w_px:.2f} {h_px:.2f}" data-x-min="{float(lo[0])!r}" data-y-min="{float(lo[1])!r}" '
        f'data-x-max="{float(hi[0])!r}" data-y-max="{float(hi[1])!r}" data-scale="{SCALE!r}">',
        '<rect width="100%" height="100%" fill="#f7f9fb"/>',
        '<g id="walls" fill="#555" stroke="none">',
    ]
    out += [f'<polygon points="{path(r)}"/>' for r in walls]
    out.append("</g>")
    out.append('<g id="footprints" fill="none" stroke="#3a7bd5" stroke-width="1" opacity="0.6">')
    out += [f'<polygon points="{path(f)}"/>' for f in feet]
    out.append("</g>")
    out.append(f'<polyline id="trajectory" fill="none" stroke="#d53a3a" stroke-width="2" '
               f'points="{path(np.stack([x, y], axis=1))}"/>')
    markers = [("entry", entry, "#2a9d3a"), ("dock-center", center, "#000")]
    if est_center is not None:
        markers.append(("estimated-center", est_center, "#e08a00"))
    for name, (mx, my), colour in markers:
        out.append(f'<circle id={quoteattr(name)} cx="{sx(mx):.2f}" cy="{sy(my):.2f}" r="4" fill="{colour}"/>')
    outcome = ""
    if "zone" in log and len(log["zone"]):
        outcome = f" final zone: {log['zone'][-1]}"
    out.append(f'<text x="6" y="16" font-family="sans-serif" font-size="12">'
               f't = {t[-1]:.2f} s{outcome}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
