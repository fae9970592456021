import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mppi_dock.plot import EmptyPlotError, emit_plot
from mppi_dock.world import build_dock

NS = {"s": "http://www.w3.org/2000/svg"}
DOCK = build_dock()


def _log(x, y, psi=None):
    n = len(x)
    return {"t": np.arange(n) * 0.05, "x": np.asarray(x, float), "y": np.asarray(y, float),
            "psi": np.zeros(n) if psi is None else np.asarray(psi, float)}


def _points(el):
    return np.array([[float(v) for v in p.split(",")] for p in el.get("points").split()])


def _world(root, px):
    x0, y1, s = (float(root.get(k)) for k in ("data-x-min", "data-y-max", "data-scale"))
    return np.c_[x0 + px[:, 0] / s, y1 - px[:, 1] / s]


def test_straight_line_monotone_x():
    x = np.linspace(0.0, 6.0, 121)
    root = ET.fromstring(emit_plot(_log(x, np.full_like(x, -5.0)), DOCK))
    line = _points(root.find("s:polyline[@id='trajectory']", NS))
    assert len(line) == len(x)
    assert np.all(np.diff(line[:, 0]) > 0)
    # 6 s of log -> footprints at 0..6 s
    assert len(root.find("s:g[@id='footprints']", NS)) == 7
    for name in ("entry", "dock-center"):
        assert root.find(f"s:circle[@id='{name}']", NS) is not None


def test_bounding_box_contains_everything():
    rng = np.random.default_rng(2)
    x, y = rng.uniform(-20, 30, 50), rng.uniform(-25, 15, 50)
    root = ET.fromstring(emit_plot(_log(x, y, rng.uniform(-3, 3, 50)), DOCK))
    lo = np.array([float(root.get("data-x-min")), float(root.get("data-y-min"))])
    hi = np.array([float(root.get("data-x-max")), float(root.get("data-y-max"))])
    pts = np.c_[x, y]
    walls = np.concatenate([w.rectangle() for w in DOCK.walls])
    for p in (pts, walls):
        assert np.all(p >= lo) and np.all(p <= hi)
    # drawn coordinates map back onto the inputs
    drawn = _world(root, _points(root.find("s:polyline[@id='trajectory']", NS)))
    np.testing.assert_allclose(drawn, pts, atol=0.01)
    w, h = float(root.get("width")), float(root.get("height"))
    for el in root.iter():
        if el.get("points"):
            q = _points(el)
            assert np.all(q >= -1e-6) and np.all(q[:, 0] <= w + 0.1) and np.all(q[:, 1] <= h + 0.1)


def test_estimated_center_from_log():
    log = _log([1.0, 2.0], [-5.0, -5.0])
    log.update(est_valid=np.array([1.0, 0.0]), dock_cx=np.array([9.8, np.nan]), dock_cy=np.array([-5.1, np.nan]),
               entry_x=np.array([6.3, np.nan]), entry_y=np.array([-5.1, np.nan]))
    root = ET.fromstring(emit_plot(log, DOCK))
    assert root.find("s:circle[@id='estimated-center']", NS) is not None


def test_empty_log():
    with pytest.raises(EmptyPlotError):
        emit_plot(_log([], []), DOCK)
    with pytest.raises(ValueError):
        emit_plot({}, DOCK)
