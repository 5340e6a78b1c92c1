"""
Foreground shape families.

Every family is an indicator over normalized shape coordinates ``(u, v)``: the
shape is centred at the origin and roughly fills the unit disk. Pose (centre,
scale, rotation) is applied by the renderer. Rotations are kept small so that
families differing by a rotation (cross / x-cross, square / diamond-like
polygons) stay distinguishable.
"""

from typing import Callable, Dict

import numpy as np

ShapeFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

SHAPES: Dict[str, ShapeFn] = {}


def shape(name: str) -> Callable[[ShapeFn], ShapeFn]:
    def decorator(func: ShapeFn) -> ShapeFn:
        SHAPES[name] = func
        return func

    return decorator


def _polar(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.hypot(u, v), np.arctan2(v, u) % (2.0 * np.pi)


def _polygon(k: int) -> ShapeFn:
    def inside(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        r, theta = _polar(u, v)
        sector = 2.0 * np.pi / k
        local = theta % sector - sector / 2.0
        return r * np.cos(local) <= np.cos(np.pi / k)

    return inside


def _star(k: int, inner: float = 0.45) -> ShapeFn:
    def inside(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        r, theta = _polar(u, v)
        t = (theta * k / (2.0 * np.pi)) % 1.0
        return r <= inner + (1.0 - inner) * np.abs(2.0 * t - 1.0)

    return inside


def _flower(k: int) -> ShapeFn:
    def inside(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        r, theta = _polar(u, v)
        return r <= 0.55 + 0.45 * np.cos(k * theta)

    return inside


@shape("disk")
def _disk(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u * u + v * v <= 1.0


@shape("ring")
def _ring(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    r2 = u * u + v * v
    return (r2 <= 1.0) & (r2 >= 0.3)


@shape("ellipse")
def _ellipse(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u * u + (v / 0.5) ** 2 <= 1.0


SHAPES["triangle"] = _polygon(3)
SHAPES["square"] = _polygon(4)
SHAPES["pentagon"] = _polygon(5)
SHAPES["hexagon"] = _polygon(6)
SHAPES["octagon"] = _polygon(8)
SHAPES["star4"] = _star(4, inner=0.35)
SHAPES["star5"] = _star(5)
SHAPES["star6"] = _star(6)
SHAPES["star8"] = _star(8, inner=0.6)
SHAPES["flower3"] = _flower(3)
SHAPES["flower5"] = _flower(5)


@shape("cross")
def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    bar = 0.3
    return ((np.abs(u) <= bar) & (np.abs(v) <= 1.0)) | ((np.abs(v) <= bar) & (np.abs(u) <= 1.0))


@shape("xcross")
def _xcross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return _cross((u + v) / np.sqrt(2.0), (u - v) / np.sqrt(2.0))


@shape("crescent")
def _crescent(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (u * u + v * v <= 1.0) & ((u - 0.45) ** 2 + v * v > 0.64)


@shape("semicircle")
def _semicircle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (u * u + (v + 0.45) ** 2 <= 1.0) & (v >= -0.45)


@shape("l_shape")
def _l_shape(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    stem = (u >= -0.9) & (u <= -0.3) & (np.abs(v) <= 0.9)
    foot = (v >= 0.3) & (v <= 0.9) & (np.abs(u) <= 0.9)
    return stem | foot


@shape("t_shape")
def _t_shape(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    top = (v >= -0.9) & (v <= -0.3) & (np.abs(u) <= 0.9)
    stem = (np.abs(u) <= 0.3) & (np.abs(v) <= 0.9)
    return top | stem


@shape("arrow")
def _arrow(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    shaft = (np.abs(v) <= 0.25) & (u >= -1.0) & (u <= 0.1)
    head = (u >= 0.1) & (u <= 1.0) & (np.abs(v) <= 1.0 - u)
    return shaft | head


@shape("heart")
def _heart(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    x = 1.2 * u
    y = -1.2 * v + 0.2
    return (x * x + y * y - 1.0) ** 3 - x * x * y**3 <= 0.0


@shape("hbars")
def _hbars(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (np.abs(u) <= 0.9) & ((np.abs(v - 0.5) <= 0.22) | (np.abs(v + 0.5) <= 0.22))


@shape("dumbbell")
def _dumbbell(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    left = (u + 0.6) ** 2 + v * v <= 0.16
    right = (u - 0.6) ** 2 + v * v <= 0.16
    bar = (np.abs(v) <= 0.12) & (np.abs(u) <= 0.6)
    return left | right | bar


def render_alpha(
    family: str,
    size: int,
    center: tuple[float, float],
    radius: float,
    rotation: float,
    supersample: int,
) -> np.ndarray:
    """
    Rasterize a shape into an antialiased (size, size) alpha matte.

    Args:
        family: Name registered in ``SHAPES``
        size: Output side length in pixels
        center: (row, col) centre in pixels
        radius: Pixels per shape unit
        rotation: Radians
        supersample: Subpixel samples per axis
    """
    inside = SHAPES[family]
    n = size * supersample
    coords = (np.arange(n) + 0.5) / supersample
    rows, cols = np.meshgrid(coords, coords, indexing="ij")
    dy, dx = rows - center[0], cols - center[1]
    cos_r, sin_r = np.cos(rotation), np.sin(rotation)
    u = (cos_r * dx + sin_r * dy) / radius
    v = (-sin_r * dx + cos_r * dy) / radius
    hits = inside(u, v).astype(np.float64)
    return hits.reshape(size, supersample, size, supersample).mean(axis=(1, 3))
