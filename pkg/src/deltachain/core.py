"""Finite metric dynamical systems and the product metric on biinfinite sequences.

A :class:`FiniteMetricSystem` is the desk-scale stand-in for a compact metric
space with a continuous self-map: a finite point set, a normalized distance
matrix (diameter at most 1) and a total map given by an index array.  Finite
windows of biinfinite sequences over the point set are held by
:class:`FiniteTrajectory`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientWindow, NotAMetric, SchemaError, SizeOverflow

#: Absolute tolerance for all threshold comparisons on distances.  Grid
#: examples produce exact dyadic values; comparisons must not flip on rounding.
TOL = 1e-12


def _check_metric(d, tol=1e-9):
    """Raise NotAMetric if ``d`` is not a metric matrix; returns nothing."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotAMetric("matrix is not square")
    n = d.shape[0]
    if np.any(d < -tol):
        i, j = np.unravel_index(np.argmin(d), d.shape)
        raise NotAMetric("negative entry", (int(i), int(j)))
    asym = np.abs(d - d.T)
    if np.max(asym) > tol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise NotAMetric("not symmetric", (int(i), int(j)))
    if np.max(np.abs(np.diag(d))) > tol:
        i = int(np.argmax(np.abs(np.diag(d))))
        raise NotAMetric("nonzero diagonal", (i, i))
    # triangle inequality: d[i,k] <= min_j d[i,j] + d[j,k]
    for j in range(n):
        slack = d - (d[:, j][:, None] + d[j, :][None, :])
        if np.max(slack) > tol:
            i, k = np.unravel_index(np.argmax(slack), slack.shape)
            raise NotAMetric("triangle inequality fails", (int(i), j, int(k)))


def normalize_metric(raw):
    """Clamp a metric matrix entrywise to ``min(1, raw)``.

    The input must already be a metric (symmetric, zero diagonal, triangle
    inequality); otherwise :class:`NotAMetric` is raised with a violating
    triple.  Clamping preserves the metric axioms and bounds the diameter
    by 1.  Idempotent.
    """
    raw = np.asarray(raw, dtype=float)
    _check_metric(raw)
    return np.minimum(raw, 1.0)


@dataclass(frozen=True)
class FiniteMetricSystem:
    """A finite point set with a normalized metric and a total self-map.

    ``dist`` is an n-by-n matrix with entries in [0, 1]; ``map_image[u]`` is
    the id of the image of point ``u``.  Instances are immutable after
    construction and safe to share between workers.
    """

    labels: tuple
    dist: np.ndarray
    map_image: tuple

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        _check_metric(d)
        if np.max(d) > 1.0 + TOL:
            raise NotAMetric("entry exceeds 1; call normalize_metric first")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        n = d.shape[0]
        if len(self.labels) != n:
            raise SchemaError("/points", f"expected {n} labels, got {len(self.labels)}")
        image = tuple(int(v) for v in self.map_image)
        if len(image) != n or any(not (0 <= v < n) for v in image):
            raise SchemaError("/map", "map_image must list a valid id for every point")
        object.__setattr__(self, "map_image", image)

    @property
    def n(self):
        return self.dist.shape[0]

    def rho(self, u, v):
        return float(self.dist[u, v])

    def apply(self, u):
        return self.map_image[u]

    def orbit(self, u, length):
        """The true orbit u, T(u), ..., T^(length-1)(u) as a list of ids."""
        out = [u]
        for _ in range(length - 1):
            out.append(self.map_image[out[-1]])
        return out


@dataclass(frozen=True)
class FiniteTrajectory:
    """A finite window of a biinfinite sequence of point ids.

    ``entries[origin]`` carries coordinate 0; coordinate ``k`` is
    ``entries[origin + k]``.  The covered range is
    ``[-origin, len(entries) - origin - 1]``.
    """

    entries: tuple
    origin: int = 0

    def __post_init__(self):
        entries = tuple(int(v) for v in self.entries)
        if not entries:
            raise SchemaError("/entries", "trajectory must be non-empty")
        object.__setattr__(self, "entries", entries)

    @property
    def min_coord(self):
        return -self.origin

    @property
    def max_coord(self):
        return len(self.entries) - self.origin - 1

    def covers(self, lo, hi):
        """True iff every coordinate in [lo, hi] is present."""
        return self.min_coord <= lo and hi <= self.max_coord

    def at(self, k):
        if not self.covers(k, k):
            raise InsufficientWindow(f"coordinate {k} not covered")
        return self.entries[self.origin + k]

    def window(self, lo, hi):
        """Ids at coordinates lo..hi inclusive."""
        if not self.covers(lo, hi):
            raise InsufficientWindow(f"window [{lo}, {hi}] not covered")
        return self.entries[self.origin + lo : self.origin + hi + 1]

    def shifted(self, j):
        """The trajectory of S^j: coordinate k of the result is x_{j+k}."""
        return FiniteTrajectory(self.entries, self.origin + j)


@dataclass(frozen=True)
class IntervalSegment:
    """An orbit-segment declaration: coordinates [a, b) read from ``source``."""

    a: int
    b: int
    source: FiniteTrajectory

    def __post_init__(self):
        if self.a >= self.b:
            raise SchemaError("/segment", f"need a < b, got [{self.a}, {self.b})")
        if not self.source.covers(self.a, self.b - 1):
            raise InsufficientWindow(f"source does not cover [{self.a}, {self.b})")


def pi_distance(sys, x, y, radius):
    """Windowed product-metric distance between two sequences.

    Evaluates ``max over |k| <= radius of min(rho(x_k, y_k), 1/(|k|+1))``.
    Every unseen coordinate contributes at most ``1/(radius+2)``, so the
    result is exact iff it exceeds that tail bound; otherwise the tail bound
    itself is returned as an upper bound with ``exact=False``.
    """
    K = int(radius)
    if K < 1:
        raise InsufficientWindow("radius must be a positive integer")
    if not (x.covers(-K, K) and y.covers(-K, K)):
        raise InsufficientWindow(f"both trajectories must cover [-{K}, {K}]")
    tail = 1.0 / (K + 2)
    value = 0.0
    for k in range(-K, K + 1):
        term = min(sys.rho(x.at(k), y.at(k)), 1.0 / (abs(k) + 1))
        if term > value:
            value = term
    if value > tail + TOL:
        return value, True
    return tail, False


def window_radius(eps):
    """Largest |k| that condition (|k|+1 <= max(1, 1/eps)) admits."""
    return int(max(1.0, 1.0 / eps) + TOL) - 1


def window_check(sys, eps, x, y):
    """Certify pi(x, y) < eps from the finitely many binding coordinates.

    Checks ``rho(x_k, y_k) < eps`` for all k with ``|k| + 1 <= max(1, 1/eps)``;
    coordinates outside that window are dominated by 1/(|k|+1) < eps.
    """
    if not 0.0 < eps <= 1.0:
        raise SchemaError("/eps", "eps must lie in (0, 1]")
    W = window_radius(eps)
    if not (x.covers(-W, W) and y.covers(-W, W)):
        raise InsufficientWindow(f"both trajectories must cover [-{W}, {W}]")
    return all(sys.rho(x.at(k), y.at(k)) < eps - TOL for k in range(-W, W + 1))


def product_system(a, b, cap=100_000):
    """Product of two systems under the max metric and the componentwise map."""
    if a.n * b.n > cap:
        raise SizeOverflow(f"product has {a.n * b.n} points, cap is {cap}")
    labels = tuple(f"{la}|{lb}" for la in a.labels for lb in b.labels)
    dist = np.maximum(
        np.kron(a.dist, np.ones((b.n, b.n))), np.tile(b.dist, (a.n, a.n))
    )
    image = tuple(
        a.map_image[u] * b.n + b.map_image[v] for u in range(a.n) for v in range(b.n)
    )
    return FiniteMetricSystem(labels, dist, image)


def surjective_core(sys):
    """Eventual image of the map: the largest subset on which it is a bijection.

    Iterates the image set to its fixpoint.  Returns the core ids (sorted) and
    the system restricted to them, with ids relabeled in sorted order.
    """
    current = set(range(sys.n))
    while True:
        image = {sys.map_image[u] for u in current}
        if image == current:
            break
        current = image
    core = sorted(current)
    index = {u: i for i, u in enumerate(core)}
    dist = sys.dist[np.ix_(core, core)]
    labels = tuple(sys.labels[u] for u in core)
    image = tuple(index[sys.map_image[u]] for u in core)
    return core, FiniteMetricSystem(labels, dist, image)


# ---------------------------------------------------------------------------
# System-spec files


def _circle_grid_metric(n):
    i = np.arange(n)
    diff = np.abs(i[:, None] - i[None, :])
    return np.minimum(diff, n - diff) / n


def _line_grid_metric(n):
    if n < 2:
        return np.zeros((n, n))
    x = np.arange(n) / (n - 1)
    return np.abs(x[:, None] - x[None, :])


def system_from_dict(data):
    """Build a system from the JSON system-spec structure.

    Returns ``(system, clamped)`` where ``clamped`` records whether
    normalization changed any entry.
    """
    if not isinstance(data, dict):
        raise SchemaError("", "system spec must be an object")
    unknown = set(data) - {"points", "metric", "map"}
    if unknown:
        raise SchemaError(f"/{sorted(unknown)[0]}", "unknown field")
    for key in ("points", "metric", "map"):
        if key not in data:
            raise SchemaError(f"/{key}", "missing required field")
    metric = data["metric"]
    if not isinstance(metric, dict) or len(metric) != 1:
        raise SchemaError("/metric", "expected exactly one of matrix/circle_grid/line_grid")
    kind, value = next(iter(metric.items()))
    if kind == "matrix":
        raw = np.asarray(value, dtype=float)
    elif kind == "circle_grid":
        raw = _circle_grid_metric(int(value))
    elif kind == "line_grid":
        raw = _line_grid_metric(int(value))
    else:
        raise SchemaError(f"/metric/{kind}", "unknown metric kind")
    dist = normalize_metric(raw)
    clamped = bool(np.any(dist < raw - TOL))
    system = FiniteMetricSystem(tuple(data["points"]), dist, tuple(data["map"]))
    return system, clamped


def load_system(path):
    """Load a system-spec JSON file; see :func:`system_from_dict`."""
    with open(path) as fh:
        data = json.load(fh)
    return system_from_dict(data)


def system_to_dict(sys):
    return {
        "points": list(sys.labels),
        "metric": {"matrix": sys.dist.tolist()},
        "map": list(sys.map_image),
    }
