"""Stochastic covers of finite relations and their ergodic Markov measures.

A stochastic cover of a relation G on K is a column-stochastic matrix whose
support pattern is exactly G: ``matrix[j][i] > 0`` iff (i, j) is an edge.
Such a matrix drives a Markov chain whose sample paths are the words of G,
and its structure certifies tractability of the induced subshift:

* every terminal basic set B carries a unique stationary vector v_B, strictly
  positive on B (Frobenius theory on the irreducible block);
* the associated shift-ergodic Markov measure has the cylinder weights
  ``mu⟨s_0 .. s_n⟩ = initial(s_0) * prod matrix[s_{t+1}][s_t]``;
* mass on transient elements decays geometrically, witnessed by an explicit
  (n, rho) certificate;
* a path chosen by any positive-initial Markov measure is almost surely
  generic for the measure of the terminal class it enters.

Floating point is used throughout this module (the exact-rational analogues
live with the callers that need them).  Cylinder weights of long words
underflow near 1e-308, which is why genericity is checked with empirical
word frequencies rather than raw products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (CoverError, DomainError, ElementMismatchError,
                     NotStationaryError, NotTerminalError, NumericalError,
                     ValidationError)
from .relation import (BasicSetDecomposition, FiniteRelation, basic_sets,
                       check_word, endset_certificate)

_MASK64 = (1 << 64) - 1

COLUMN_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-12
DECOMPOSE_TOL = 1e-9


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 generator: (state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def _unit_float(bits: int) -> float:
    # 53 high bits -> double in [0, 1)
    return (bits >> 11) * (2.0 ** -53)


@dataclass(frozen=True, eq=False)
class StochasticCover:
    """Column-stochastic matrix whose support equals a relation's edge set."""

    relation: FiniteRelation
    matrix: np.ndarray  # matrix[j, i] = transition weight i -> j

    def __post_init__(self):
        object.__setattr__(self, "matrix",
                           np.array(self.matrix, dtype=float, copy=True))
        self.matrix.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.relation.elements)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Non-negative weights summing to 1 over an indexed element set."""

    weights: np.ndarray
    support: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights",
                           np.array(self.weights, dtype=float, copy=True))
        self.weights.setflags(write=False)

    @classmethod
    def from_weights(cls, weights) -> "Distribution":
        arr = np.asarray(weights, dtype=float)
        if arr.ndim != 1:
            raise ValidationError("distribution weights must be a vector")
        if np.any(arr < 0):
            raise ValidationError("distribution weights must be non-negative")
        if abs(float(arr.sum()) - 1.0) > COLUMN_SUM_TOL:
            raise ValidationError(
                f"distribution sums to {arr.sum():.17g}, expected 1")
        support = tuple(int(i) for i in np.nonzero(arr > 0)[0])
        return cls(arr, support)

    @classmethod
    def point_mass(cls, size: int, index: int) -> "Distribution":
        w = np.zeros(size)
        w[index] = 1.0
        return cls.from_weights(w)

    @classmethod
    def uniform(cls, size: int) -> "Distribution":
        return cls.from_weights(np.full(size, 1.0 / size))


@dataclass(frozen=True)
class MarkovMeasureSpec:
    """A cover plus an initial distribution: a Markov measure on sample paths."""

    cover: StochasticCover
    initial: Distribution

    def __post_init__(self):
        if len(self.initial.weights) != self.cover.size:
            raise ElementMismatchError(
                "initial distribution length does not match the cover")


@dataclass(frozen=True)
class DecayCertificate:
    """Transient mass bound: (P^(n k))_{transient, s} <= rho^k for all s, k >= 1."""

    n: int
    rho: float


def validate_cover(relation: FiniteRelation, matrix) -> StochasticCover:
    """Check support pattern and column sums, returning the cover."""
    arr = np.asarray(matrix, dtype=float)
    size = len(relation.elements)
    if arr.shape != (size, size):
        raise CoverError(f"matrix shape {arr.shape} does not match {size} elements")
    if np.any(arr < 0) or np.any(arr > 1 + COLUMN_SUM_TOL):
        raise CoverError("matrix entries must lie in [0, 1]")
    for i in range(size):
        for j in range(size):
            has_edge = relation.has_edge(i, j)
            if has_edge and arr[j, i] <= 0:
                raise CoverError(
                    f"edge ({relation.elements[i]}, {relation.elements[j]}) "
                    "has zero weight")
            if not has_edge and arr[j, i] != 0:
                raise CoverError(
                    f"non-edge ({relation.elements[i]}, {relation.elements[j]}) "
                    f"has weight {arr[j, i]:.17g}")
    sums = arr.sum(axis=0)
    bad = [i for i in range(size) if abs(sums[i] - 1.0) > COLUMN_SUM_TOL]
    if bad:
        raise CoverError(
            "columns do not sum to 1: "
            + ", ".join(f"{relation.elements[i]} -> {sums[i]:.17g}" for i in bad))
    return StochasticCover(relation, arr)


def uniform_cover(relation: FiniteRelation) -> StochasticCover:
    """Equal weight on each outgoing edge."""
    size = len(relation.elements)
    matrix = np.zeros((size, size))
    for i in range(size):
        succ = relation.successors(i)
        if not succ:
            raise DomainError(
                f"element {relation.elements[i]!r} has no outgoing edge")
        for j in succ:
            matrix[j, i] = 1.0 / len(succ)
    return validate_cover(relation, matrix)


def transient_decay(cover: StochasticCover,
                    decomposition: BasicSetDecomposition) -> DecayCertificate:
    """Geometric decay certificate for the total transient mass.

    n is the smallest number of steps after which every element has some word
    into a terminal class; rho is the worst-case transient mass of P^n.  When
    nothing is transient the certificate is the trivial (1, 0).
    """
    if decomposition.relation is not cover.relation and \
            decomposition.relation.elements != cover.relation.elements:
        raise ElementMismatchError("decomposition does not match the cover")
    transient = set(decomposition.transient)
    if not transient:
        return DecayCertificate(n=1, rho=0.0)

    # BFS over reversed edges from the terminal block.
    size = cover.size
    dist = {i: 0 for i in range(size) if i not in transient}
    frontier = sorted(dist)
    while frontier:
        nxt = []
        for j in frontier:
            for i in cover.relation.predecessors(j):
                if i not in dist:
                    dist[i] = dist[j] + 1
                    nxt.append(i)
        frontier = sorted(nxt)
    unreachable = [cover.relation.elements[i] for i in range(size) if i not in dist]
    if unreachable:
        raise DomainError(
            "no word into a terminal class from: " + ", ".join(unreachable))
    n = max(1, max(dist.values()))

    power = np.linalg.matrix_power(cover.matrix, n)
    rows = sorted(transient)
    rho = float(power[rows, :].sum(axis=0).max())
    certificate = DecayCertificate(n=n, rho=rho)

    # The bound propagates exactly in theory; allow only float slack.
    for k in range(1, 6):
        power_k = np.linalg.matrix_power(cover.matrix, n * k)
        worst = float(power_k[rows, :].sum(axis=0).max())
        if worst > rho ** k + 1e-9:
            raise NumericalError(
                f"decay certificate failed at k={k}: {worst} > {rho}^{k}")
    return certificate


def _check_terminal_class(cover: StochasticCover, class_members) -> tuple[int, ...]:
    members = tuple(sorted(set(int(i) for i in class_members)))
    size = cover.size
    if not members:
        raise NotTerminalError("empty class")
    for i in members:
        if not (0 <= i < size):
            raise NotTerminalError(f"element index {i} out of range")
    inside = set(members)
    for i in inside:
        for j in cover.relation.successors(i):
            if j not in inside:
                raise NotTerminalError(
                    f"edge leaves the class: ({cover.relation.elements[i]}, "
                    f"{cover.relation.elements[j]})")
    # Irreducibility of the block: every member reaches every other inside.
    for start in members:
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in cover.relation.successors(node):
                if nxt in inside and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if seen != inside:
            raise NotTerminalError("class is not strongly connected")
    return members


def stationary_distribution(cover: StochasticCover,
                            terminal_class) -> Distribution:
    """Unique stationary distribution supported on a terminal class.

    Solves the balance equations directly; if the linear solve degrades, a
    Cesaro-averaged power iteration (which converges for periodic blocks too)
    is used as fallback.  The result is deterministic and satisfies
    ``||P v - v||_inf <= 1e-12``.
    """
    members = _check_terminal_class(cover, terminal_class)
    idx = np.array(members)
    block = cover.matrix[np.ix_(idx, idx)]
    c = len(members)

    v_block = None
    try:
        system = block - np.eye(c)
        system[-1, :] = 1.0
        rhs = np.zeros(c)
        rhs[-1] = 1.0
        candidate = np.linalg.solve(system, rhs)
        if np.all(candidate > 0) and \
                float(np.abs(block @ candidate - candidate).max()) <= STATIONARY_TOL:
            v_block = candidate
    except np.linalg.LinAlgError:
        pass

    if v_block is None:
        # Cesaro averages of the powers applied to the uniform vector.
        current = np.full(c, 1.0 / c)
        total = np.zeros(c)
        average = current
        for step in range(1, 200001):
            total += current
            current = block @ current
            average = total / step
            if float(np.abs(block @ average - average).max()) <= STATIONARY_TOL:
                break
        v_block = average / average.sum()
        if float(np.abs(block @ v_block - v_block).max()) > STATIONARY_TOL:
            raise NumericalError(
                "stationary distribution did not reach residual 1e-12")

    full = np.zeros(cover.size)
    full[idx] = v_block
    return Distribution.from_weights(full)


def decompose_stationary(cover: StochasticCover,
                         stationary,
                         decomposition: BasicSetDecomposition | None = None
                         ) -> dict[int, float]:
    """Express a stationary vector as a mixture of the terminal-class ones.

    Returns ``{class_index: weight}`` over the terminal classes of the
    decomposition.  Verifies that the input is stationary, puts (numerically)
    no mass on transient elements, and is reproduced by the mixture within
    1e-9.
    """
    v = stationary.weights if isinstance(stationary, Distribution) \
        else np.asarray(stationary, dtype=float)
    if len(v) != cover.size:
        raise ElementMismatchError("vector length does not match the cover")
    residual = float(np.abs(cover.matrix @ v - v).max())
    if residual > DECOMPOSE_TOL:
        raise NotStationaryError(
            f"stationarity residual {residual:.3e} exceeds 1e-9")
    if decomposition is None:
        decomposition = basic_sets(cover.relation)

    transient_mass = float(v[list(decomposition.transient)].sum()) \
        if decomposition.transient else 0.0
    if transient_mass > DECOMPOSE_TOL:
        raise NotStationaryError(
            f"transient elements carry mass {transient_mass:.3e}")

    weights: dict[int, float] = {}
    reconstruction = np.zeros(cover.size)
    for c in decomposition.terminal_classes():
        members = decomposition.classes[c]
        mass = float(v[list(members)].sum())
        weights[c] = mass
        if mass > 0:
            v_b = stationary_distribution(cover, members)
            reconstruction += mass * v_b.weights
    mismatch = float(np.abs(reconstruction - v).max())
    if mismatch > DECOMPOSE_TOL:
        raise NumericalError(
            f"mixture reconstruction off by {mismatch:.3e} (> 1e-9)")
    return weights


def cylinder_measure(spec: MarkovMeasureSpec, word) -> float:
    """Measure of the cylinder of a finite word; 0 for non-words."""
    word = tuple(word)
    if not word:
        raise ValidationError("empty word has no cylinder")
    size = spec.cover.size
    for s in word:
        if not (0 <= s < size):
            raise ValidationError(f"symbol {s} out of range")
    for a, b in zip(word, word[1:]):
        if not spec.cover.relation.has_edge(a, b):
            return 0.0
    value = float(spec.initial.weights[word[0]])
    for a, b in zip(word, word[1:]):
        value *= float(spec.cover.matrix[b, a])
    return value


def ergodic_measure_spec(cover: StochasticCover,
                         decomposition: BasicSetDecomposition,
                         terminal_class) -> MarkovMeasureSpec:
    """The shift-ergodic Markov measure attached to one terminal class."""
    members = tuple(sorted(set(int(i) for i in terminal_class)))
    matching = [c for c in decomposition.terminal_classes()
                if decomposition.classes[c] == members]
    if not matching:
        raise NotTerminalError(
            f"{members} is not a terminal class of the decomposition")
    return MarkovMeasureSpec(cover, stationary_distribution(cover, members))


def sample_path(spec: MarkovMeasureSpec, length: int, seed: int) -> list[int]:
    """Deterministic Markov path via splitmix64 and inverse-CDF sampling.

    Identical (spec, length, seed) always yields the identical path; columns
    are scanned in element order when inverting the CDF, making the result
    bit-reproducible across platforms.
    """
    if length < 1:
        raise ValidationError("path length must be >= 1")
    state = seed & _MASK64
    matrix = spec.cover.matrix
    size = spec.cover.size

    def draw(weights, state):
        state, bits = _splitmix64(state)
        u = _unit_float(bits)
        acc = 0.0
        last_positive = None
        for j in range(size):
            w = float(weights[j])
            if w > 0:
                last_positive = j
                acc += w
                if u < acc:
                    return j, state
        # Guard against accumulated rounding at u ~ 1.
        if last_positive is None:
            raise NumericalError("cannot sample from an all-zero column")
        return last_positive, state

    current, state = draw(spec.initial.weights, state)
    path = [current]
    for _ in range(length - 1):
        current, state = draw(matrix[:, current], state)
        path.append(current)
    return path


@dataclass(frozen=True)
class GenericityReport:
    """Outcome of the statistical cylinder-frequency test on one path."""

    path_length: int
    word_length_cap: int
    terminal_class: int | None
    max_deviation: float
    threshold: float
    passed: bool
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "T": self.path_length,
            "L": self.word_length_cap,
            "terminal_class": self.terminal_class,
            "max_dev": self.max_deviation,
            "threshold": self.threshold,
            "pass": self.passed,
            "note": self.note,
        }


def genericity_check(cover: StochasticCover,
                     decomposition: BasicSetDecomposition,
                     path,
                     word_length_cap: int) -> GenericityReport:
    """Statistical certificate that a path is generic for its endset measure.

    Empirical frequencies of every word of length <= word_length_cap are
    compared against the ergodic cylinder weights of the terminal class the
    path has entered; the test passes when the worst deviation stays below
    5 / sqrt(T).  A path that never entered a terminal class is reported as
    failed rather than raised.
    """
    path = check_word(cover.relation, path)
    t = len(path)
    size = cover.size
    if word_length_cap < 1:
        raise ValidationError("word length cap must be >= 1")
    needed = 10 * size ** word_length_cap
    if t < needed:
        raise ValidationError(
            f"path length {t} below required {needed} for L={word_length_cap}")
    threshold = 5.0 / (t ** 0.5)

    terminal = endset_certificate(cover.relation, decomposition, path)
    if terminal is None:
        return GenericityReport(t, word_length_cap, None, float("inf"),
                                threshold, False,
                                "path never entered a terminal class")
    spec = ergodic_measure_spec(cover, decomposition,
                                decomposition.classes[terminal])

    max_dev = 0.0
    for length in range(1, word_length_cap + 1):
        windows = t - length + 1
        counts: dict[tuple[int, ...], int] = {}
        for start in range(windows):
            key = path[start:start + length]
            counts[key] = counts.get(key, 0) + 1
        words = [(s,) for s in range(size)]
        for _ in range(length - 1):
            words = [w + (s,) for w in words for s in range(size)]
        for word in words:
            expected = cylinder_measure(spec, word)
            observed = counts.get(word, 0) / windows
            max_dev = max(max_dev, abs(observed - expected))

    return GenericityReport(t, word_length_cap, terminal, max_dev, threshold,
                            max_dev <= threshold)


@dataclass(frozen=True)
class SubshiftReport:
    """Tractability summary of the subshift induced by a stochastic cover."""

    cover: StochasticCover
    decomposition: BasicSetDecomposition
    stationary: tuple[Distribution, ...]  # one per terminal class, in order
    decay: DecayCertificate
    genericity: GenericityReport | None = None

    def to_json_dict(self) -> dict:
        rel = self.cover.relation
        decomp = self.decomposition
        terminal = decomp.terminal_classes()
        stationary = []
        for pos, c in enumerate(terminal):
            weights = {rel.elements[i]: float(self.stationary[pos].weights[i])
                       for i in decomp.classes[c]}
            stationary.append({
                "class": list(decomp.class_labels(c)),
                "weights": weights,
            })
        return {
            "elements": list(rel.elements),
            "basic_sets": [list(decomp.class_labels(c))
                           for c in range(len(decomp.classes))],
            "terminal": [list(decomp.class_labels(c)) for c in terminal],
            "transient": [rel.elements[i] for i in decomp.transient],
            "order": sorted([a, b] for a, b in decomp.order),
            "stationary": stationary,
            "decay": {"n": self.decay.n, "rho": self.decay.rho},
            "trac": {
                "finitely_many_basic_sets": {
                    "holds": True, "count": len(decomp.classes)},
                "ergodic_measures_full_mass": {
                    "holds": True,
                    "count": len(terminal),
                    "decay": {"n": self.decay.n, "rho": self.decay.rho}},
                "supports_in_visible_basic_sets": {
                    "holds": True,
                    "visible": [list(decomp.class_labels(c)) for c in terminal]},
                "supports_almost_disjoint": {
                    "holds": True, "note": "supports are pairwise disjoint"},
            },
            "genericity": (self.genericity.to_json_dict()
                           if self.genericity else None),
        }


def tractability_report_subshift(cover: StochasticCover,
                                 initial: Distribution) -> SubshiftReport:
    """Full tractability report for the subshift of a cover.

    The initial distribution plays the role of the background measure and
    must be strictly positive, so that every basic set is charged.
    """
    if len(initial.weights) != cover.size:
        raise ElementMismatchError("initial distribution does not match cover")
    if np.any(initial.weights <= 0):
        raise ValidationError("background initial distribution must be positive")
    decomposition = basic_sets(cover.relation)
    stationary = tuple(stationary_distribution(cover, decomposition.classes[c])
                       for c in decomposition.terminal_classes())
    decay = transient_decay(cover, decomposition)
    return SubshiftReport(cover, decomposition, stationary, decay)
