"""
UGV path: piecewise-constant curvature against arc length, with closed-form
heading and position lookup (line and circular-arc segments).
"""
import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .errors import RangeError

logger = logging.getLogger(__name__)

Scalar = Union[float, np.ndarray]

# arc-length slack tolerated at both path ends
END_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Segment:
    length: float
    curvature: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("Segment length must be positive")


class PathPoint(NamedTuple):
    sigma: Scalar
    chi: Scalar
    x: Scalar
    y: Scalar


@dataclass(frozen=True)
class Path:
    """Ordered segments from an initial pose; heading is continuous, curvature may jump at joints"""
    segments: Tuple[Segment, ...]
    x0: float = 0.0
    y0: float = 0.0
    chi0: float = 0.0
    _s: np.ndarray = field(init=False, repr=False, compare=False)
    _chi: np.ndarray = field(init=False, repr=False, compare=False)
    _x: np.ndarray = field(init=False, repr=False, compare=False)
    _y: np.ndarray = field(init=False, repr=False, compare=False)
    _sigma: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("Path needs at least one segment")
        object.__setattr__(self, "segments", segments)

        s, chi, x, y = [0.0], [self.chi0], [self.x0], [self.y0]
        for seg in segments:
            chi_end = chi[-1] + seg.curvature * seg.length
            if seg.curvature == 0.0:
                x_end = x[-1] + seg.length * np.cos(chi[-1])
                y_end = y[-1] + seg.length * np.sin(chi[-1])
            else:
                x_end = x[-1] + (np.sin(chi_end) - np.sin(chi[-1])) / seg.curvature
                y_end = y[-1] - (np.cos(chi_end) - np.cos(chi[-1])) / seg.curvature
            s.append(s[-1] + seg.length)
            chi.append(chi_end)
            x.append(x_end)
            y.append(y_end)

        for name, values in (("_s", s), ("_chi", chi), ("_x", x), ("_y", y),
                             ("_sigma", [seg.curvature for seg in segments])):
            arr = np.array(values, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def total_length(self) -> float:
        return float(self._s[-1])

    @property
    def joints(self) -> np.ndarray:
        """Arc lengths of the interior segment joints"""
        return self._s[1:-1]

    def _segment_index(self, s_G: Scalar) -> np.ndarray:
        s_real = np.real(s_G)
        if np.any(s_real < -END_TOLERANCE) or np.any(s_real > self.total_length + END_TOLERANCE):
            raise RangeError(
                f"arc length outside path [0, {self.total_length:.3f}] m "
                f"(got {np.min(s_real):.3f}..{np.max(s_real):.3f})")
        idx = np.searchsorted(self._s, s_real, side="right") - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def heading(self, s_G: Scalar) -> Tuple[Scalar, Scalar]:
        """(curvature, heading) at arc length s_G"""
        idx = self._segment_index(s_G)
        sigma = self._sigma[idx]
        chi = self._chi[idx] + sigma * (s_G - self._s[idx])
        return sigma, chi

    def lookup(self, s_G: Scalar) -> PathPoint:
        """Curvature, heading and position at arc length s_G"""
        idx = self._segment_index(s_G)
        sigma = self._sigma[idx]
        ds = s_G - self._s[idx]
        chi_entry = self._chi[idx]
        chi = chi_entry + sigma * ds

        straight = sigma == 0.0
        safe_sigma = np.where(straight, 1.0, sigma)
        x_arc = self._x[idx] + (np.sin(chi) - np.sin(chi_entry)) / safe_sigma
        y_arc = self._y[idx] - (np.cos(chi) - np.cos(chi_entry)) / safe_sigma
        x_line = self._x[idx] + ds * np.cos(chi_entry)
        y_line = self._y[idx] + ds * np.sin(chi_entry)
        x = np.where(straight, x_line, x_arc)
        y = np.where(straight, y_line, y_arc)
        if np.ndim(s_G) == 0:
            return PathPoint(sigma[()], chi[()], x[()], y[()])
        return PathPoint(sigma, chi, x, y)

    def extended(self, length: float) -> "Path":
        """Copy of the path grown by a terminal straight so that it covers `length`"""
        if length <= self.total_length:
            return self
        extra = length - self.total_length
        logger.warning("WARNING: extending path by a %.1f m terminal straight to cover %.1f m", extra, length)
        return Path(self.segments + (Segment(extra, 0.0),), self.x0, self.y0, self.chi0)

    def to_dict(self) -> dict:
        return {
            "x0": self.x0, "y0": self.y0, "chi0": self.chi0,
            "segments": [{"length": seg.length, "curvature": seg.curvature} for seg in self.segments],
        }


def path_lookup(path: Path, s_G: Scalar) -> PathPoint:
    """(sigma, chi_G, x_G, y_G) at arc length s_G"""
    return path.lookup(s_G)


def straight_path(length: float, chi0: float = 0.0, x0: float = 0.0, y0: float = 0.0) -> Path:
    return Path((Segment(length, 0.0),), x0, y0, chi0)


def path_from_segments(segments: Sequence[dict], x0: float = 0.0, y0: float = 0.0, chi0: float = 0.0) -> Path:
    items: List[Segment] = [Segment(float(seg["length"]), float(seg.get("curvature", 0.0))) for seg in segments]
    return Path(tuple(items), x0, y0, chi0)
