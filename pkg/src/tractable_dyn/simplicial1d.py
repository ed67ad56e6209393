"""Piecewise-linear interval dynamics via simplicial maps, in exact rationals.

A 1-D interval complex K is a strictly increasing list of rational vertices;
its simplices are the vertices and the closed edges between neighbours.  A
simplicial system is a proper subdivision K* of K (every K edge split at
least once) together with a non-degenerate vertex map into V(K); the induced
map g is affine on each K* edge and sends it onto a full K edge.  Because
every K* vertex interior to a K edge keeps both barycentric coordinates at
least theta, each local inverse of g contracts the barycentric metric d_K by
the factor (1 - theta), and iterated inverse images of K* edges shrink
geometrically.  That yields:

* exact symbolic coding: a word of K* edges pins a nested rational interval
  of d_K-length at most 2 (1-theta)^(word length);
* the Lebesgue distribution data nu(t) = |t| / |J(t)|, which presents g as a
  two-alphabet model whose ergodic Markov measures push forward to the
  piecewise-constant invariant densities of g;
* quantitative rounding: any Lipschitz self-map can be approximated by such
  a g within 2 mesh(K), with a further 4 mesh(K) slack if degeneracies of
  the rounded vertex map must be repaired.

All geometry in this module is exact (fractions.Fraction); floating point
appears only in the norm-bound spot check and in Markov sampling, never in
the dynamics.  Forward float iteration of g is deliberately avoided (binary
orbits of tent-like maps collapse); orbit statistics are gathered by
sampling symbolic paths and decoding them.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import markov, two_alphabet
from .config import resolve_cell_cap
from .errors import (CapExceededError, CorrespondenceError, DegenerateMapError,
                     MapRangeError, NotTerminalError, NumericalError,
                     SubdivisionError, ValidationError, WordError)
from .rationals import format_rational, parse_rational


@dataclass(frozen=True)
class IntervalComplex:
    """Strictly increasing rational vertices; edges join neighbours."""

    vertices: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices",
                           tuple(Fraction(v) for v in self.vertices))
        if len(self.vertices) < 2:
            raise ValidationError("an interval complex needs at least 2 vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not a < b:
                raise ValidationError("vertices must be strictly increasing")

    @property
    def n_edges(self) -> int:
        return len(self.vertices) - 1

    @property
    def lo(self) -> Fraction:
        return self.vertices[0]

    @property
    def hi(self) -> Fraction:
        return self.vertices[-1]

    def edge(self, i: int) -> tuple[Fraction, Fraction]:
        if not (0 <= i < self.n_edges):
            raise ValidationError(f"edge index {i} out of range")
        return self.vertices[i], self.vertices[i + 1]

    def edge_length(self, i: int) -> Fraction:
        a, b = self.edge(i)
        return b - a

    def mesh(self) -> Fraction:
        return max(self.edge_length(i) for i in range(self.n_edges))

    def contains(self, x) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def vertex_index(self, x) -> int | None:
        x = Fraction(x)
        i = bisect.bisect_left(self.vertices, x)
        if i < len(self.vertices) and self.vertices[i] == x:
            return i
        return None

    def locate_edge(self, x) -> int:
        """Index of an edge containing x (left edge at interior vertices)."""
        x = Fraction(x)
        if not self.contains(x):
            raise ValidationError(f"{x} lies outside [{self.lo}, {self.hi}]")
        i = bisect.bisect_right(self.vertices, x) - 1
        return min(max(i, 0), self.n_edges - 1)


def barycentric(complex_: IntervalComplex, x) -> dict[int, Fraction]:
    """Barycentric coordinates of x: weights on at most two vertices.

    At a vertex the carrier is the vertex itself, so the single coordinate
    is 1; inside an edge both endpoint coordinates are positive.
    """
    x = Fraction(x)
    vertex = complex_.vertex_index(x)
    if vertex is not None:
        return {vertex: Fraction(1)}
    i = complex_.locate_edge(x)
    a, b = complex_.edge(i)
    length = b - a
    return {i: (b - x) / length, i + 1: (x - a) / length}


def metric_d(complex_: IntervalComplex, x, y) -> Fraction:
    """The barycentric L1 metric: 2|x-y|/|edge| inside a common edge."""
    bx = barycentric(complex_, x)
    by = barycentric(complex_, y)
    keys = set(bx) | set(by)
    return sum((abs(bx.get(i, Fraction(0)) - by.get(i, Fraction(0)))
                for i in keys), start=Fraction(0))


@dataclass(frozen=True)
class AffineMap:
    """Exact rational affine map t -> scale * t + offset."""

    scale: Fraction
    offset: Fraction

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(Fraction(1), Fraction(0))

    def __call__(self, x: Fraction) -> Fraction:
        return self.scale * x + self.offset

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner."""
        return AffineMap(self.scale * inner.scale,
                         self.scale * inner.offset + self.offset)

    def inverse(self) -> "AffineMap":
        if self.scale == 0:
            raise ValidationError("constant affine map has no inverse")
        return AffineMap(1 / self.scale, -self.offset / self.scale)

    def interval_image(self, lo: Fraction, hi: Fraction
                       ) -> tuple[Fraction, Fraction]:
        a, b = self(lo), self(hi)
        return (a, b) if a <= b else (b, a)


def _normalize_vmap(kstar: IntervalComplex, k: IntervalComplex,
                    vmap) -> tuple[int, ...]:
    if isinstance(vmap, Mapping):
        parsed = {Fraction(parse_rational(key)): parse_rational(value)
                  for key, value in vmap.items()}
        missing = [v for v in kstar.vertices if v not in parsed]
        if missing:
            raise ValidationError(
                f"vertex map missing images for {[str(v) for v in missing]}")
        extra = [key for key in parsed if kstar.vertex_index(key) is None]
        if extra:
            raise ValidationError(
                f"vertex map has unknown vertices {[str(v) for v in extra]}")
        values = [parsed[v] for v in kstar.vertices]
    else:
        values = [parse_rational(v) for v in vmap]
        if len(values) != len(kstar.vertices):
            raise ValidationError("vertex map must cover every fine vertex")
    images = []
    for value in values:
        idx = k.vertex_index(value)
        if idx is None:
            raise ValidationError(f"image {value} is not a coarse vertex")
        images.append(idx)
    return tuple(images)


def _check_subdivision(k: IntervalComplex, kstar: IntervalComplex):
    if (kstar.lo, kstar.hi) != (k.lo, k.hi):
        raise SubdivisionError("fine and coarse complexes span different intervals")
    coarse = set(k.vertices)
    fine = set(kstar.vertices)
    if not coarse <= fine:
        missing = sorted(coarse - fine)
        raise SubdivisionError(
            f"coarse vertices missing from the subdivision: "
            f"{[str(v) for v in missing]}")
    for i in range(k.n_edges):
        a, b = k.edge(i)
        if not any(a < w < b for w in kstar.vertices):
            raise SubdivisionError(
                f"edge [{a}, {b}] is not split: subdivision is not proper")


@dataclass(frozen=True)
class SimplicialSystem1D:
    """Proper subdivision plus a non-degenerate simplicial vertex map."""

    k: IntervalComplex
    kstar: IntervalComplex
    vertex_images: tuple[int, ...]  # coarse vertex index per fine vertex

    def image_value(self, fine_vertex: int) -> Fraction:
        return self.k.vertices[self.vertex_images[fine_vertex]]

    def j_edge(self, star_edge: int) -> int:
        """Coarse edge containing a fine edge."""
        a, _ = self.kstar.edge(star_edge)
        return self.k.locate_edge(a)

    def star_edge_image(self, star_edge: int) -> int:
        """Coarse edge the fine edge maps onto."""
        p0 = self.vertex_images[star_edge]
        p1 = self.vertex_images[star_edge + 1]
        return min(p0, p1)

    def local_inverse(self, star_edge: int) -> AffineMap:
        """Affine inverse of g from the image coarse edge onto the fine edge."""
        w0, w1 = self.kstar.edge(star_edge)
        p0 = self.image_value(star_edge)
        p1 = self.image_value(star_edge + 1)
        scale = (w1 - w0) / (p1 - p0)
        return AffineMap(scale, w0 - scale * p0)

    def k_edge_label(self, i: int) -> str:
        return f"I{i + 1}"

    def star_edge_label(self, star_edge: int) -> str:
        base = self.j_edge(star_edge)
        rank = sum(1 for j in range(star_edge) if self.j_edge(j) == base)
        return f"I{base + 1}.{rank + 1}"


def build_system(k: IntervalComplex, kstar: IntervalComplex,
                 vmap) -> SimplicialSystem1D:
    """Validate subdivision, properness and non-degeneracy, and build.

    The vertex map may be a mapping from fine vertices (rationals or "p/q"
    strings) to coarse vertices, or a sequence aligned with the fine vertex
    list.  Adjacent fine vertices must have distinct, adjacent coarse images;
    use nondegenerate_repair for maps that collapse edges.
    """
    _check_subdivision(k, kstar)
    images = _normalize_vmap(kstar, k, vmap)
    for j in range(kstar.n_edges):
        p0, p1 = images[j], images[j + 1]
        w0, w1 = kstar.edge(j)
        if p0 == p1:
            raise DegenerateMapError(
                f"edge [{w0}, {w1}] collapses to vertex {k.vertices[p0]}")
        if abs(p0 - p1) != 1:
            raise DegenerateMapError(
                f"edge [{w0}, {w1}] maps onto non-adjacent vertices "
                f"{k.vertices[p0]}, {k.vertices[p1]}")
    return SimplicialSystem1D(k, kstar, images)


def pl_eval_vmap(k: IntervalComplex, kstar: IntervalComplex,
                 images: Sequence[int], x) -> Fraction:
    """Evaluate the piecewise-linear extension of a vertex map (may collapse)."""
    x = Fraction(x)
    j = kstar.locate_edge(x)
    w0, w1 = kstar.edge(j)
    p0 = k.vertices[images[j]]
    p1 = k.vertices[images[j + 1]]
    return p0 + (x - w0) * (p1 - p0) / (w1 - w0)


def pl_eval(system: SimplicialSystem1D, x) -> Fraction:
    """Exact value of g at a rational point."""
    return pl_eval_vmap(system.k, system.kstar, system.vertex_images, x)


def theta(system: SimplicialSystem1D) -> Fraction:
    """Least positive coarse barycentric coordinate of the fine vertices.

    Only vertices interior to a coarse edge contribute; properness guarantees
    at least one, and the value lies in (0, 1/2].
    """
    best: Fraction | None = None
    for w in system.kstar.vertices:
        if system.k.vertex_index(w) is not None:
            continue
        i = system.k.locate_edge(w)
        a, b = system.k.edge(i)
        weight = min((b - w) / (b - a), (w - a) / (b - a))
        best = weight if best is None else min(best, weight)
    if best is None:
        raise SubdivisionError("no interior fine vertices; subdivision improper")
    return best


@dataclass(frozen=True)
class NormBoundResult:
    bound: float
    max_ratio: float
    samples: int


def column_stochastic_norm_bound(matrix, theta_value,
                                 samples: int = 1000,
                                 seed: int = 2026) -> NormBoundResult:
    """Spot-check the L1 contraction of a column-stochastic matrix.

    On the subspace of coordinate-sum-zero vectors, a non-negative matrix
    with unit column sums in which every column pair shares a row with both
    entries >= theta contracts the L1 norm by (1 - theta/d), d+1 being the
    number of columns.  The bound is exercised on all signed basis
    differences plus ``samples`` random centred vectors.
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2:
        raise ValidationError("matrix must be two-dimensional")
    rows, cols = arr.shape
    if cols < 2:
        raise ValidationError("need at least two columns (d >= 1)")
    if np.any(arr < -1e-12):
        raise ValidationError("matrix entries must be non-negative")
    sums = arr.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise ValidationError("columns must sum to 1")
    theta_float = float(theta_value)
    if not (0 < theta_float <= 1):
        raise ValidationError("theta must lie in (0, 1]")
    for j1 in range(cols):
        for j2 in range(j1 + 1, cols):
            shared = np.any((arr[:, j1] >= theta_float - 1e-12)
                            & (arr[:, j2] >= theta_float - 1e-12))
            if not shared:
                raise ValidationError(
                    f"columns {j1}, {j2} share no row with entries >= theta")
    d = cols - 1
    bound = 1.0 - theta_float / d

    max_ratio = 0.0
    tested = 0
    for j1 in range(cols):
        for j2 in range(cols):
            if j1 == j2:
                continue
            a = np.zeros(cols)
            a[j1], a[j2] = 1.0, -1.0
            ratio = float(np.abs(arr @ a).sum()) / 2.0
            max_ratio = max(max_ratio, ratio)
            tested += 1
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < samples:
        a = rng.uniform(-1.0, 1.0, cols)
        a -= a.mean()
        norm = float(np.abs(a).sum())
        if norm < 1e-9:
            continue
        ratio = float(np.abs(arr @ a).sum()) / norm
        max_ratio = max(max_ratio, ratio)
        produced += 1
        tested += 1
    if max_ratio > bound + 1e-12:
        raise NumericalError(
            f"L1 ratio {max_ratio:.17g} exceeds the bound {bound:.17g}")
    return NormBoundResult(bound=bound, max_ratio=max_ratio, samples=tested)


def _check_star_word(system: SimplicialSystem1D, word) -> tuple[int, ...]:
    word = tuple(int(j) for j in word)
    if not word:
        raise WordError("empty fine-edge word")
    for j in word:
        if not (0 <= j < system.kstar.n_edges):
            raise WordError(f"fine edge index {j} out of range")
    for j1, j2 in zip(word, word[1:]):
        if system.j_edge(j2) != system.star_edge_image(j1):
            raise WordError(
                f"({system.star_edge_label(j1)}, {system.star_edge_label(j2)}) "
                "is not an edge of the fine relation")
    return word


def code_H_1d(system: SimplicialSystem1D, word) -> tuple[Fraction, Fraction]:
    """Exact interval of points whose itinerary starts with the given word.

    The word lists fine edges with each consecutive pair compatible (the next
    edge lies in the image of the previous one).  Pulling the last edge back
    through the chain of local inverses gives a rational interval inside the
    word's first edge whose d_K-length is at most 2 (1-theta)^len(word).
    """
    word = _check_star_word(system, word)
    lo, hi = system.kstar.edge(word[-1])
    for j in reversed(word[:-1]):
        lo, hi = system.local_inverse(j).interval_image(lo, hi)
    first_lo, first_hi = system.kstar.edge(word[0])
    assert first_lo <= lo <= hi <= first_hi
    base = system.j_edge(word[0])
    d_length = 2 * (hi - lo) / system.k.edge_length(base)
    assert d_length <= 2 * (1 - theta(system)) ** len(word)
    # The itinerary really is the word: iterate g exactly (rationals, so no
    # orbit collapse) on endpoints and midpoint.
    for x in (lo, (lo + hi) / 2, hi):
        for j in word:
            a, b = system.kstar.edge(j)
            assert a <= x <= b
            x = pl_eval(system, x)
    return lo, hi


@dataclass(frozen=True)
class MeshReport:
    depth: int
    cells: int
    mesh_d: Fraction
    bound: Fraction

    @property
    def tight(self) -> bool:
        return self.mesh_d == self.bound


def refine(system: SimplicialSystem1D, depth: int,
           cap: int | None = None) -> tuple[IntervalComplex, MeshReport]:
    """The depth-th inverse-image subdivision and its d_K mesh.

    Depth 0 (and 1) reproduce the fine complex; depth n tiles the space by
    the coded intervals of all fine words of length n, whose d_K mesh is at
    most 2 (1-theta)^n.  The number of cells is guarded by the cell cap.
    """
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    length = max(depth, 1)
    limit = resolve_cell_cap(cap)
    successors = [[j2 for j2 in range(system.kstar.n_edges)
                   if system.j_edge(j2) == system.star_edge_image(j)]
                  for j in range(system.kstar.n_edges)]

    intervals: list[tuple[Fraction, Fraction, int]] = []
    stack = [(j, 1, AffineMap.identity(), j)
             for j in reversed(range(system.kstar.n_edges))]
    while stack:
        j, at, chain, root = stack.pop()
        if at == length:
            lo, hi = chain.interval_image(*system.kstar.edge(j))
            intervals.append((lo, hi, root))
            if len(intervals) > limit:
                raise CapExceededError(
                    f"refinement would exceed the cell cap {limit}")
            continue
        extended = chain.compose(system.local_inverse(j))
        for j2 in reversed(successors[j]):
            stack.append((j2, at + 1, extended, root))

    intervals.sort(key=lambda item: item[0])
    cursor = system.k.lo
    mesh_d = Fraction(0)
    for lo, hi, root in intervals:
        assert lo == cursor, "decoded cells do not tile the space"
        cursor = hi
        base = system.j_edge(root)
        mesh_d = max(mesh_d, 2 * (hi - lo) / system.k.edge_length(base))
    assert cursor == system.k.hi

    bound = 2 * (1 - theta(system)) ** depth
    assert mesh_d <= bound
    vertices = sorted({system.k.lo} | {hi for _, hi, _ in intervals})
    report = MeshReport(depth=depth, cells=len(intervals), mesh_d=mesh_d,
                        bound=bound)
    return IntervalComplex(tuple(vertices)), report


def lebesgue_distribution_data(system: SimplicialSystem1D) -> list[Fraction]:
    """nu(t) = |t| / |J(t)|: the Lebesgue weight of each fine edge in its
    coarse edge.  Fiber sums are exactly 1."""
    out = []
    for j in range(system.kstar.n_edges):
        base = system.j_edge(j)
        out.append(system.kstar.edge_length(j) / system.k.edge_length(base))
    return out


def to_two_alphabet(system: SimplicialSystem1D) -> two_alphabet.TwoAlphabetModel:
    """Present the system on the alphabets of fine and coarse edges."""
    kstar_labels = [system.star_edge_label(j)
                    for j in range(system.kstar.n_edges)]
    k_labels = [system.k_edge_label(i) for i in range(system.k.n_edges)]
    return two_alphabet.build_model(
        kstar=kstar_labels,
        k=k_labels,
        j_map=[system.j_edge(j) for j in range(system.kstar.n_edges)],
        gamma=[system.star_edge_image(j) for j in range(system.kstar.n_edges)],
        nu=lebesgue_distribution_data(system),
    )


@dataclass(frozen=True)
class RepairReport:
    changed: bool
    reassigned: int
    inserted: int
    sup_change: Fraction
    bound: Fraction


def nondegenerate_repair(k: IntervalComplex, kstar: IntervalComplex,
                         vmap) -> tuple[SimplicialSystem1D, RepairReport]:
    """Break collapsed runs of a vertex map without moving it far.

    The input must be simplicial up to collapses: adjacent fine vertices map
    to equal or adjacent coarse vertices.  Every maximal run of >= 2 vertices
    sharing one image v is rewritten to alternate between v and a fixed
    coarse neighbour of v, starting and ending at v; runs of even length
    first gain the midpoint of their leading edge so the alternation can
    close.  Neighbouring images are adjacent to v, so the result is
    non-degenerate, and no image moves by more than one coarse edge: the map
    changes by at most 4 mesh(K) in the sup metric (at most mesh(K) for this
    construction).
    """
    _check_subdivision(k, kstar)
    images = list(_normalize_vmap(kstar, k, vmap))
    verts = list(kstar.vertices)
    for j in range(len(verts) - 1):
        if abs(images[j] - images[j + 1]) > 1:
            raise DegenerateMapError(
                f"edge [{verts[j]}, {verts[j + 1]}] maps onto non-adjacent "
                "vertices; cannot repair a torn map")

    new_verts: list[Fraction] = []
    new_images: list[int] = []
    reassigned = 0
    inserted = 0
    pos = 0
    while pos < len(verts):
        end = pos
        while end + 1 < len(verts) and images[end + 1] == images[pos]:
            end += 1
        run_length = end - pos + 1
        if run_length == 1:
            new_verts.append(verts[pos])
            new_images.append(images[pos])
            pos += 1
            continue
        v = images[pos]
        u = v - 1 if v >= 1 else v + 1
        run_verts = verts[pos:end + 1]
        if run_length % 2 == 0:
            midpoint = (run_verts[0] + run_verts[1]) / 2
            run_verts = [run_verts[0], midpoint] + run_verts[1:]
            inserted += 1
        for offset, w in enumerate(run_verts):
            new_verts.append(w)
            image = v if offset % 2 == 0 else u
            new_images.append(image)
            if offset % 2 == 1:
                reassigned += 1
        pos = end + 1

    repaired_star = IntervalComplex(tuple(new_verts))
    system = build_system(k, repaired_star, [k.vertices[i] for i in new_images])

    sup_change = Fraction(0)
    for w in repaired_star.vertices:
        before = pl_eval_vmap(k, kstar, images, w)
        after = pl_eval(system, w)
        sup_change = max(sup_change, abs(before - after))
    bound = 4 * k.mesh()
    assert sup_change <= bound
    report = RepairReport(changed=(reassigned + inserted) > 0,
                          reassigned=reassigned, inserted=inserted,
                          sup_change=sup_change, bound=bound)
    return system, report


@dataclass(frozen=True)
class RoundoffReport:
    mesh: Fraction
    error_bound: Fraction
    repaired: bool
    repair: RepairReport | None
    parts_per_edge: tuple[int, ...]


def _neighbourhood_bounds(k: IntervalComplex):
    """Open star intervals of simplices in the derived subdivision.

    Returns (vertex_bounds, edge_bounds) as float pairs, with infinities at
    the boundary of the space so domain-end containment is automatic.
    """
    mids = [float((a + b) / 2) for a, b in
            (k.edge(i) for i in range(k.n_edges))]
    inf = float("inf")
    vertex_bounds = []
    for i in range(len(k.vertices)):
        left = mids[i - 1] if i - 1 >= 0 else -inf
        right = mids[i] if i < len(mids) else inf
        vertex_bounds.append((left, right))
    edge_bounds = []
    for i in range(k.n_edges):
        left = mids[i - 1] if i - 1 >= 0 else -inf
        right = mids[i + 1] if i + 1 < len(mids) else inf
        edge_bounds.append((left, right))
    return vertex_bounds, edge_bounds


def roundoff(f: Callable[[float], float], k: IntervalComplex,
             lipschitz) -> tuple[SimplicialSystem1D, RoundoffReport]:
    """Round a Lipschitz self-map of the interval to a simplicial system.

    ``f`` is sampled at rational points (as floats) and ``lipschitz`` bounds
    its variation.  A subdivision fine enough for every cell image to fit a
    derived-star neighbourhood is chosen, each cell is assigned the minimal
    coarse simplex whose neighbourhood contains its image, and cell images
    pick the nearest vertex of that simplex.  The result is within
    2 mesh(K) of f in the sup metric; if the rounded vertex map collapses
    edges it is repaired, adding at most 4 mesh(K).
    """
    lip = Fraction(parse_rational(lipschitz)) if not isinstance(lipschitz, float) \
        else Fraction(lipschitz)
    if lip <= 0:
        raise ValidationError("Lipschitz bound must be positive")

    mids = [(a + b) / 2 for a, b in (k.edge(i) for i in range(k.n_edges))]
    if len(mids) >= 2:
        lebesgue = min(m2 - m1 for m1, m2 in zip(mids, mids[1:]))
    else:
        lebesgue = None

    parts = []
    for i in range(k.n_edges):
        length = k.edge_length(i)
        if lebesgue is None:
            parts.append(1)
        else:
            delta = lebesgue / (2 * lip)
            parts.append(max(1, -(-length // delta)))
    sub_vertices: list[Fraction] = [k.lo]
    for i in range(k.n_edges):
        a, b = k.edge(i)
        step = (b - a) / parts[i]
        for piece in range(1, int(parts[i]) + 1):
            sub_vertices.append(a + piece * step)
    coarse_cells = IntervalComplex(tuple(sub_vertices))

    lo_f, hi_f = float(k.lo), float(k.hi)

    def sample(x: Fraction) -> float:
        value = float(f(float(x)))
        if not (lo_f - 1e-9 <= value <= hi_f + 1e-9):
            raise MapRangeError(
                f"f({float(x):.17g}) = {value:.17g} leaves the space")
        return value

    vertex_bounds, edge_bounds = _neighbourhood_bounds(k)

    def minimal_simplex(img_lo: float, img_hi: float):
        img_lo, img_hi = max(img_lo, lo_f), min(img_hi, hi_f)
        for i, (left, right) in enumerate(vertex_bounds):
            if left < img_lo and img_hi < right:
                return ("vertex", i)
        for i, (left, right) in enumerate(edge_bounds):
            if left < img_lo and img_hi < right:
                return ("edge", i)
        raise NumericalError(
            "no simplex neighbourhood contains a cell image; "
            "Lipschitz bound too small?")

    def pick_vertex(simplex, target: float) -> int:
        kind, i = simplex
        if kind == "vertex":
            return i
        left, right = float(k.vertices[i]), float(k.vertices[i + 1])
        return i if abs(target - left) <= abs(target - right) else i + 1

    # Derived subdivision: cell vertices keep their sample's simplex, cell
    # midpoints get the simplex of the whole cell's image bound.
    fine_vertices: list[Fraction] = []
    images: list[int] = []
    for i in range(coarse_cells.n_edges):
        a, b = coarse_cells.edge(i)
        value_a = sample(a)
        simplex_a = minimal_simplex(value_a, value_a)
        fine_vertices.append(a)
        images.append(pick_vertex(simplex_a, value_a))

        mid = (a + b) / 2
        value_mid = sample(mid)
        half_span = float(lip * (b - a) / 2)
        simplex_mid = minimal_simplex(value_mid - half_span,
                                      value_mid + half_span)
        fine_vertices.append(mid)
        images.append(pick_vertex(simplex_mid, value_mid))
    last = coarse_cells.hi
    value_last = sample(last)
    fine_vertices.append(last)
    images.append(pick_vertex(minimal_simplex(value_last, value_last),
                              value_last))

    fine = IntervalComplex(tuple(fine_vertices))
    mesh = k.mesh()
    degenerate = any(images[j] == images[j + 1]
                     for j in range(fine.n_edges))
    if degenerate:
        system, repair = nondegenerate_repair(
            k, fine, [k.vertices[i] for i in images])
        return system, RoundoffReport(
            mesh=mesh, error_bound=2 * mesh + repair.bound, repaired=True,
            repair=repair, parts_per_edge=tuple(int(p) for p in parts))
    system = build_system(k, fine, [k.vertices[i] for i in images])
    return system, RoundoffReport(
        mesh=mesh, error_bound=2 * mesh, repaired=False, repair=None,
        parts_per_edge=tuple(int(p) for p in parts))


def class_support(system: SimplicialSystem1D,
                   members: Sequence[int]) -> list[tuple[Fraction, Fraction]]:
    """Merged closed interval components of a set of coarse edges."""
    members = sorted(members)
    components = []
    start = prev = members[0]
    for i in members[1:]:
        if i == prev + 1:
            prev = i
            continue
        components.append((system.k.vertices[start], system.k.vertices[prev + 1]))
        start = prev = i
    components.append((system.k.vertices[start], system.k.vertices[prev + 1]))
    return components


@dataclass(frozen=True)
class PLReport:
    """Tractability summary of a piecewise-linear simplicial system."""

    system: SimplicialSystem1D
    model: two_alphabet.TwoAlphabetModel
    correspondence: two_alphabet.Correspondence
    theta: Fraction
    stationary: tuple[dict[int, Fraction], ...]  # per terminal pair, coarse
    decay: markov.DecayCertificate
    background: tuple[float, ...]
    absorption: dict[int, float]
    genericity: markov.GenericityReport | None = None

    def to_json_dict(self) -> dict:
        system = self.system
        decomp = self.correspondence.base_decomposition
        pairs = list(self.correspondence.pairs)
        terminal_pairs = [p for p in pairs if p.terminal]

        def interval_json(component):
            return [format_rational(component[0]), format_rational(component[1])]

        measures = []
        for pos, pair in enumerate(terminal_pairs):
            v_b = self.stationary[pos]
            support = class_support(system, pair.base_members)
            density = []
            for i in sorted(pair.base_members):
                weight = v_b[i]
                density.append({
                    "interval": interval_json(system.k.edge(i)),
                    "weight": format_rational(weight),
                    "density": format_rational(
                        weight / system.k.edge_length(i)),
                })
            measures.append({
                "class": [system.k_edge_label(i)
                          for i in sorted(pair.base_members)],
                "support": [interval_json(c) for c in support],
                "density": density,
                "background_mass": self.absorption[pair.base_class_index],
            })

        supports = {c: class_support(system, decomp.classes[c])
                    for c in range(len(decomp.classes))}
        shared = []
        for c1 in range(len(decomp.classes)):
            for c2 in range(c1 + 1, len(decomp.classes)):
                points = sorted(
                    {a1 for s1 in supports[c1] for a1 in s1}
                    & {a2 for s2 in supports[c2] for a2 in s2})
                if points:
                    shared.append({
                        "classes": [list(decomp.class_labels(c1)),
                                    list(decomp.class_labels(c2))],
                        "points": [format_rational(p) for p in points],
                        "note": ("supports touch; the map-level basic set "
                                 "containing them may be strictly larger "
                                 "than either coarse class suggests"),
                    })
        visible_not_terminal = []
        terminal_indices = set(decomp.terminal_classes())
        for c in range(len(decomp.classes)):
            if c in terminal_indices:
                continue
            touching = [t for t in sorted(terminal_indices)
                        if any(set(s1) & set(s2)
                               for s1 in supports[c] for s2 in supports[t])]
            if touching:
                visible_not_terminal.append({
                    "class": list(decomp.class_labels(c)),
                    "touches_terminal": [list(decomp.class_labels(t))
                                         for t in touching],
                    "note": ("visible but not terminal: this non-terminal "
                             "class abuts a terminal support, so at the map "
                             "level the touched basic set can be visible "
                             "without being terminal; not resolved at the "
                             "interval level"),
                })

        return {
            "space": [format_rational(system.k.lo), format_rational(system.k.hi)],
            "theta": format_rational(self.theta),
            "basic_sets": [list(decomp.class_labels(c))
                           for c in range(len(decomp.classes))],
            "terminal": [list(decomp.class_labels(c))
                         for c in decomp.terminal_classes()],
            "transient": [decomp.relation.elements[i] for i in decomp.transient],
            "order": sorted([a, b] for a, b in decomp.order),
            "stationary": [
                {system.k_edge_label(i): format_rational(v)
                 for i, v in sorted(self.stationary[pos].items())}
                for pos in range(len(terminal_pairs))],
            "measures": measures,
            "decay": {"n": self.decay.n, "rho": self.decay.rho},
            "background": {system.k_edge_label(i): w
                           for i, w in enumerate(self.background)},
            "trac": {
                "finitely_many_basic_sets": {
                    "holds": True, "count": len(pairs)},
                "ergodic_measures_full_mass": {
                    "holds": True,
                    "count": len(terminal_pairs),
                    "decay": {"n": self.decay.n, "rho": self.decay.rho}},
                "supports_in_visible_basic_sets": {
                    "holds": True,
                    "visible": [list(decomp.class_labels(c))
                                for c in decomp.terminal_classes()]},
                "supports_almost_disjoint": {
                    "holds": True,
                    "note": ("distinct supports meet in at most finitely "
                             "many points")},
            },
            "caveats": {
                "shared_support_boundaries": shared,
                "visible_but_not_terminal": visible_not_terminal,
            },
            "genericity": (self.genericity.to_json_dict()
                           if self.genericity else None),
        }


def tractability_report_pl(system: SimplicialSystem1D,
                           background=None) -> PLReport:
    """Exact tractability report for a simplicial system.

    ``background`` weights the coarse edges (positive, summing to 1; uniform
    by default); the report includes the share of background mass absorbed
    into each terminal class.  Stationary data is exact and the projected
    stationarity identity is verified with zero tolerance.
    """
    model = to_two_alphabet(system)
    correspondence = two_alphabet.basic_set_correspondence(model)
    g_cover, _ = two_alphabet.induced_covers(model)
    decomp = correspondence.base_decomposition
    decay = markov.transient_decay(g_cover, decomp)

    if background is None:
        weights = np.full(system.k.n_edges, 1.0 / system.k.n_edges)
    else:
        weights = np.asarray([float(x) for x in background], dtype=float)
        if len(weights) != system.k.n_edges:
            raise ValidationError("background must weight every coarse edge")
        if np.any(weights <= 0):
            raise ValidationError("background weights must be positive")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ValidationError("background weights must sum to 1")

    stationary = []
    for pair in correspondence.pairs:
        if not pair.terminal:
            continue
        v_b = two_alphabet.base_class_stationary(model, pair.base_members)
        error = two_alphabet.stationary_identity_max_error(model, pair, v_b)
        if error != 0:
            raise CorrespondenceError(
                f"exact stationary identity fails by {error} on class "
                f"{pair.base_class_index}")
        stationary.append(v_b)

    # Background mass absorbed by each terminal class.
    transient = list(decomp.transient)
    current = weights.copy()
    for _ in range(100000):
        if not transient or float(current[transient].sum()) <= 1e-13:
            break
        current = g_cover.matrix @ current
    absorption = {}
    for c in decomp.terminal_classes():
        absorption[c] = float(current[list(decomp.classes[c])].sum())

    return PLReport(system=system, model=model, correspondence=correspondence,
                    theta=theta(system), stationary=tuple(stationary),
                    decay=decay, background=tuple(float(w) for w in weights),
                    absorption=absorption)


@dataclass(frozen=True)
class BirkhoffResult:
    segments: int
    depth: int
    bins: int
    max_deviation: float
    threshold: float
    passed: bool


def decode_orbit_histogram(system: SimplicialSystem1D, star_class,
                           segments: int, depth: int, bins: int,
                           seed: int) -> BirkhoffResult:
    """Birkhoff consistency of decoded symbolic orbits against the density.

    Samples one Markov path of the fine cover started in the ergodic measure
    of a terminal fine class, decodes every length-``depth`` window to an
    exact interval (sliding the affine window product, never iterating g
    forward), and compares the bin histogram of the interval midpoints on
    the class support against the invariant density, at the statistical
    threshold 5/sqrt(segments).
    """
    if segments < 1 or depth < 1 or bins < 1:
        raise ValidationError("segments, depth and bins must be positive")
    model = to_two_alphabet(system)
    correspondence = two_alphabet.basic_set_correspondence(model)
    members = tuple(sorted(int(t) for t in star_class))
    matches = [p for p in correspondence.pairs
               if tuple(sorted(p.star_members)) == members]
    if not matches or not matches[0].terminal:
        raise NotTerminalError("star_class must be a terminal fine class")
    pair = matches[0]

    v_b = two_alphabet.base_class_stationary(model, pair.base_members)
    _, gstar_cover = two_alphabet.induced_covers(model)
    initial = np.zeros(system.kstar.n_edges)
    for t in pair.star_members:
        initial[t] = float(v_b[model.j_map[t]] * model.nu[t])
    spec = markov.MarkovMeasureSpec(
        gstar_cover, markov.Distribution.from_weights(initial))
    path = markov.sample_path(spec, segments + depth, seed)

    # Support geometry in a concatenated length coordinate.
    pieces = []  # (start_in_concat, edge_lo, edge_len, density)
    offset = Fraction(0)
    for i in sorted(pair.base_members):
        lo, hi = system.k.edge(i)
        length = hi - lo
        pieces.append((offset, lo, length, v_b[i] / length))
        offset += length
    total = offset

    def concat_coordinate(x: Fraction) -> Fraction:
        for start, lo, length, _ in pieces:
            if lo <= x <= lo + length:
                return start + (x - lo)
        raise NumericalError(f"decoded point {x} left the class support")

    bin_mass = [Fraction(0)] * bins
    for b in range(bins):
        lo_c = total * b / bins
        hi_c = total * (b + 1) / bins
        for start, _, length, density in pieces:
            overlap = min(hi_c, start + length) - max(lo_c, start)
            if overlap > 0:
                bin_mass[b] += overlap * density
    assert sum(bin_mass) == 1

    maps = [system.local_inverse(j) for j in range(system.kstar.n_edges)]
    window = AffineMap.identity()
    for i in range(depth):
        window = window.compose(maps[path[i]])

    counts = [0] * bins
    for i in range(segments):
        lo, hi = window.interval_image(*system.kstar.edge(path[i + depth]))
        mid = (lo + hi) / 2
        coord = concat_coordinate(mid)
        index = min(int(coord * bins / total), bins - 1)
        counts[index] += 1
        if i + 1 < segments:
            window = maps[path[i]].inverse().compose(window).compose(
                maps[path[i + depth]])

    max_dev = max(abs(counts[b] / segments - float(bin_mass[b]))
                  for b in range(bins))
    threshold = 5.0 / segments ** 0.5
    return BirkhoffResult(segments=segments, depth=depth, bins=bins,
                          max_deviation=max_dev, threshold=threshold,
                          passed=max_dev <= threshold)


def complex_from_json(data) -> IntervalComplex:
    if not isinstance(data, dict) or set(data) != {"vertices"}:
        raise ValidationError('complex must be {"vertices": [...]}')
    vertices = data["vertices"]
    if not isinstance(vertices, list):
        raise ValidationError("'vertices' must be a list")
    return IntervalComplex(tuple(parse_rational(v) for v in vertices))


def complex_to_json(complex_: IntervalComplex) -> dict:
    return {"vertices": [format_rational(v) for v in complex_.vertices]}


def system_from_json(data) -> SimplicialSystem1D:
    if not isinstance(data, dict):
        raise ValidationError("system file must be a JSON object")
    required = {"K", "Kstar", "vmap"}
    missing = required - set(data)
    if missing:
        raise ValidationError(f"system file missing fields: {sorted(missing)}")
    unknown = set(data) - required
    if unknown:
        raise ValidationError(f"unknown system fields: {sorted(unknown)}")
    k = complex_from_json(data["K"])
    kstar = complex_from_json(data["Kstar"])
    if not isinstance(data["vmap"], dict):
        raise ValidationError("'vmap' must be an object")
    return build_system(k, kstar, data["vmap"])


def system_to_json(system: SimplicialSystem1D) -> dict:
    return {
        "K": complex_to_json(system.k),
        "Kstar": complex_to_json(system.kstar),
        "vmap": {format_rational(w): format_rational(system.image_value(j))
                 for j, w in enumerate(system.kstar.vertices)},
    }
