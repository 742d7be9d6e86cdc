"""Local reference windows sampled along the global path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPolyline


class Polyline:
    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if pts.shape[0] == 0:
            raise EmptyPolyline("polyline has no points")
        self.points = pts
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        self.arc = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.arc[-1])

    def point_at(self, s: float) -> np.ndarray:
        s = min(max(float(s), 0.0), self.length)
        if self.points.shape[0] == 1:
            return self.points[0].copy()
        i = int(np.searchsorted(self.arc, s, side="right")) - 1
        i = min(max(i, 0), len(self.arc) - 2)
        seg = self.arc[i + 1] - self.arc[i]
        if seg <= 0.0:
            return self.points[i].copy()
        w = (s - self.arc[i]) / seg
        return self.points[i] + w * (self.points[i + 1] - self.points[i])

    def project(self, point) -> float:
        """Arc offset of the closest polyline point (first one on ties)."""
        p = np.asarray(point, dtype=np.float64)
        if self.points.shape[0] == 1:
            return 0.0
        a = self.points[:-1]
        b = self.points[1:]
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        w = np.where(denom > 0, np.einsum("ij,ij->i", p - a, ab) / np.where(denom > 0, denom, 1.0), 0.0)
        w = np.clip(w, 0.0, 1.0)
        closest = a + w[:, None] * ab
        d = np.linalg.norm(closest - p, axis=1)
        i = int(np.argmin(d))
        return float(self.arc[i] + w[i] * np.sqrt(denom[i]))


def _as_polyline(polyline) -> Polyline:
    return polyline if isinstance(polyline, Polyline) else Polyline(polyline)


@dataclass(eq=False)
class ReferenceWindow:
    points: np.ndarray  # (N+1, 3) positions; reference velocity/acceleration are zero
    arcs: np.ndarray  # (N+1,) arc offsets of the points

    @property
    def arc_offset(self) -> float:
        return float(self.arcs[0])

    def states(self) -> np.ndarray:
        """Full 9-dimensional reference states."""
        out = np.zeros((self.points.shape[0], 9))
        out[:, 0:3] = self.points
        return out


def sample_window(polyline, start_offset: float, v_samp: float, h: float, N: int) -> ReferenceWindow:
    line = _as_polyline(polyline)
    arcs = np.minimum(start_offset + np.arange(N + 1) * v_samp * h, line.length)
    arcs = np.maximum(arcs, 0.0)
    points = np.array([line.point_at(s) for s in arcs])
    return ReferenceWindow(points, arcs)


def advance_window(
    prev: ReferenceWindow,
    achieved_final_position,
    thresh_dist: float,
    polyline,
    v_samp: float,
    h: float,
    N: int,
) -> ReferenceWindow:
    """Shift the window one sample forward when the last plan ended close
    enough to the previous final reference point; otherwise keep it."""
    gap = np.linalg.norm(np.asarray(achieved_final_position, dtype=np.float64) - prev.points[-1])
    if gap <= thresh_dist:
        return sample_window(polyline, float(prev.arcs[1]) if len(prev.arcs) > 1 else prev.arc_offset, v_samp, h, N)
    return prev
