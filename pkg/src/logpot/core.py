"""Compact sets, admissible weights, discrete measures, and weak-* neighborhoods.

Points in C^n are stored as complex arrays of shape (M, n). A compact set K
is always presented as a finite candidate grid; suprema over K are maxima
over candidates. Weights are expression trees over the real coordinates
x_i = Re z_i, y_i = Im z_i and r = |z|, with +inf allowed pointwise
(lower-semicontinuous weights); -inf and NaN are rejected at evaluation.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "CompactSetSpec",
    "DiscreteMeasure",
    "NeighborhoodSpec",
    "Weight",
    "WeightSyntaxError",
    "UnknownIdentifierError",
    "MASS_TOL",
    "MOMENT_METRIC_DEGREE",
    "parse_weight",
    "discretize",
    "grid_cell_sizes",
    "moment",
    "moment_indices",
    "moment_vector",
    "in_neighborhood",
    "weak_star_distance",
]

MASS_TOL = 1e-12
#: truncation degree of the weighted moment metric
MOMENT_METRIC_DEGREE = 4


# ---------------------------------------------------------------------------
# Weight expression language
# ---------------------------------------------------------------------------

class WeightSyntaxError(ValueError):
    """Malformed weight source; ``offset`` is the byte position of the error."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownIdentifierError(WeightSyntaxError):
    pass


@dataclass(frozen=True)
class _Num:
    value: float

    def canon(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class _Var:
    kind: str  # "x", "y" or "r"
    index: int  # 1-based coordinate, 0 for "r"

    def canon(self) -> str:
        return self.kind if self.kind == "r" else f"{self.kind}{self.index}"


@dataclass(frozen=True)
class _BinOp:
    op: str
    left: object
    right: object

    def canon(self) -> str:
        return f"({self.op} {self.left.canon()} {self.right.canon()})"


@dataclass(frozen=True)
class _Func:
    name: str
    arg: object

    def canon(self) -> str:
        return f"({self.name} {self.arg.canon()})"


@dataclass(frozen=True)
class _Pow:
    base: object
    exponent: float

    def canon(self) -> str:
        return f"(pow {self.base.canon()} {self.exponent!r})"


_FUNCTIONS = ("log", "exp", "abs")
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VAR_RE = re.compile(r"(?P<kind>[xy])_?(?P<index>\d*)$")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            where = len(source) - len(stripped)
            raise WeightSyntaxError(f"unexpected character {source[where]!r}", where)
        for group in ("num", "ident", "op"):
            text = m.group(group)
            if text is not None:
                tokens.append((group, text, m.start(group)))
                break
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, offset = self.peek()
        if kind != "op" or text != op:
            raise WeightSyntaxError(f"expected {op!r}", offset)
        return self.advance()

    def parse(self):
        tree = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise WeightSyntaxError(f"unexpected {text!r}", offset)
        return tree

    def expr(self):
        # leading sign is sugar for (0 - term), keeping the tree in-grammar
        kind, text, _ = self.peek()
        if kind == "op" and text in "+-":
            self.advance()
            node = self.term()
            if text == "-":
                node = _BinOp("-", _Num(0.0), node)
        else:
            node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = _BinOp(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = _BinOp(text, node, self.factor())
            else:
                return node

    def factor(self):
        node = self.primary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "^":
                self.advance()
                node = _Pow(node, self.exponent_number())
            else:
                return node

    def exponent_number(self):
        sign = 1.0
        kind, text, offset = self.peek()
        if kind == "op" and text in "+-":
            self.advance()
            sign = -1.0 if text == "-" else 1.0
            kind, text, offset = self.peek()
        if kind != "num":
            raise WeightSyntaxError("expected number after '^'", offset)
        self.advance()
        return sign * float(text)

    def primary(self):
        kind, text, offset = self.advance()
        if kind == "num":
            return _Num(float(text))
        if kind == "ident":
            if text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return _Func(text, arg)
            if text == "r":
                return _Var("r", 0)
            m = _VAR_RE.match(text)
            if m and (m.group("index") or text in ("x", "y")):
                index = int(m.group("index") or "1")
                if index < 1:
                    raise UnknownIdentifierError(f"bad coordinate index in {text!r}", offset)
                return _Var(m.group("kind"), index)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise WeightSyntaxError("unexpected end of input", offset)
        raise WeightSyntaxError(f"unexpected {text!r}", offset)


def _max_var_index(node) -> int:
    if isinstance(node, _Var):
        return node.index
    if isinstance(node, _BinOp):
        return max(_max_var_index(node.left), _max_var_index(node.right))
    if isinstance(node, _Func):
        return _max_var_index(node.arg)
    if isinstance(node, _Pow):
        return _max_var_index(node.base)
    return 0


def _eval_node(node, points: np.ndarray) -> np.ndarray:
    if isinstance(node, _Num):
        return np.full(points.shape[0], node.value)
    if isinstance(node, _Var):
        if node.kind == "r":
            return np.sqrt((np.abs(points) ** 2).sum(axis=1))
        if node.index > points.shape[1]:
            raise ValueError(
                f"weight uses coordinate {node.kind}{node.index} but points are in C^{points.shape[1]}"
            )
        col = points[:, node.index - 1]
        return col.real.copy() if node.kind == "x" else col.imag.copy()
    if isinstance(node, _BinOp):
        a = _eval_node(node.left, points)
        b = _eval_node(node.right, points)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return a / b
    if isinstance(node, _Func):
        a = _eval_node(node.arg, points)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if node.name == "log":
                return np.log(a)
            if node.name == "exp":
                return np.exp(a)
            return np.abs(a)
    if isinstance(node, _Pow):
        a = _eval_node(node.base, points)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.power(a, node.exponent)
    raise TypeError(f"bad node {node!r}")


class Weight:
    """Admissible weight Q given as an expression over point coordinates.

    Values live in (-inf, +inf]; +inf marks points annihilated by e^{-kQ}.
    An evaluation producing -inf or NaN anywhere raises, since such a Q is
    not admissible.
    """

    def __init__(self, source: str, tree=None):
        self.source = source
        self.tree = tree if tree is not None else _Parser(source).parse()
        canon = self.tree.canon().encode()
        self.weight_hash = hashlib.sha1(canon).hexdigest()[:16]

    @classmethod
    def zero(cls) -> "Weight":
        return cls("0")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points)
        values = np.asarray(_eval_node(self.tree, pts), dtype=float)
        bad = np.isneginf(values) | np.isnan(values)
        if bad.any():
            where = int(np.flatnonzero(bad)[0])
            raise ValueError(
                f"weight {self.source!r} is not admissible: value {values[where]} at point {pts[where]}"
            )
        return values

    def admissibility_fraction(self, points: np.ndarray) -> float:
        values = self(points)
        return float(np.isfinite(values).mean())

    def is_zero(self) -> bool:
        return isinstance(self.tree, _Num) and self.tree.value == 0.0

    def __repr__(self):
        return f"Weight({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Weight) and self.weight_hash == other.weight_hash

    def __hash__(self):
        return hash(self.weight_hash)


def parse_weight(source: str) -> Weight:
    """Parse a weight expression; raises WeightSyntaxError with a byte offset."""
    if not source:
        raise WeightSyntaxError("empty weight source", 0)
    try:
        source.encode("ascii")
    except UnicodeEncodeError as exc:
        raise WeightSyntaxError("weight source must be ASCII", exc.start) from None
    return Weight(source)


# ---------------------------------------------------------------------------
# Compact set specifications
# ---------------------------------------------------------------------------

def as_points(points: np.ndarray | Sequence) -> np.ndarray:
    """Coerce input to a (M, n) complex array; (M,) is read as n = 1."""
    arr = np.asarray(points, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"points must be (M,) or (M, n), got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class CompactSetSpec:
    """A compact set K in C^n presented as a finite candidate grid.

    kind is one of interval_union, circle, torus_grid, point_cloud.
    resolution means: points per unit length for interval_union, the total
    number of equispaced angles for circle, and the number of points per
    angular axis for torus_grid. point_cloud carries its points verbatim.
    """

    kind: str
    resolution: int = 1
    intervals: tuple[tuple[float, float], ...] | None = None
    center: complex = 0j
    radius: float = 1.0
    n: int = 1
    points: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("interval_union", "circle", "torus_grid", "point_cloud"):
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.resolution < 1:
            raise ValueError("resolution must be a positive integer")
        if self.n < 1:
            raise ValueError("ambient dimension must be >= 1")
        if self.kind == "interval_union":
            if not self.intervals:
                raise ValueError("interval_union needs at least one interval")
            for a, b in self.intervals:
                if not (math.isfinite(a) and math.isfinite(b)) or b < a:
                    raise ValueError(f"bad interval [{a}, {b}]")
        if self.kind == "circle" and not (self.radius > 0):
            raise ValueError("circle radius must be positive")
        if self.kind == "point_cloud" and not self.points:
            raise ValueError("point_cloud needs at least one point")

    # -- constructors -------------------------------------------------------

    @classmethod
    def interval_union(cls, intervals, resolution: int) -> "CompactSetSpec":
        ivs = tuple((float(a), float(b)) for a, b in intervals)
        return cls(kind="interval_union", intervals=ivs, resolution=resolution)

    @classmethod
    def interval(cls, a: float, b: float, resolution: int) -> "CompactSetSpec":
        return cls.interval_union([(a, b)], resolution)

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0, resolution: int = 64) -> "CompactSetSpec":
        return cls(kind="circle", center=complex(center), radius=float(radius), resolution=resolution)

    @classmethod
    def torus_grid(cls, n: int, resolution: int) -> "CompactSetSpec":
        return cls(kind="torus_grid", n=n, resolution=resolution)

    @classmethod
    def point_cloud(cls, points, n: int | None = None) -> "CompactSetSpec":
        arr = as_points(points)
        dim = arr.shape[1] if n is None else n
        flat = tuple(complex(v) for v in arr.reshape(-1))
        return cls(kind="point_cloud", n=dim, points=flat)

    # -- derived data -------------------------------------------------------

    @property
    def ambient_n(self) -> int:
        return self.n if self.kind in ("torus_grid", "point_cloud") else 1

    @property
    def candidates(self) -> np.ndarray:
        return discretize(self)

    def to_json_dict(self) -> dict:
        d: dict = {"kind": self.kind, "resolution": self.resolution}
        if self.kind == "interval_union":
            d["intervals"] = [list(iv) for iv in self.intervals]
        elif self.kind == "circle":
            d["center"] = [self.center.real, self.center.imag]
            d["radius"] = self.radius
        elif self.kind == "torus_grid":
            d["n"] = self.n
        else:
            d["n"] = self.n
            pts = np.array(self.points).reshape(-1, self.n)
            d["points"] = [[[z.real, z.imag] for z in row] for row in pts]
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "CompactSetSpec":
        kind = d.get("kind")
        resolution = int(d.get("resolution", 1))
        if kind == "interval_union":
            return cls.interval_union(d["intervals"], resolution)
        if kind == "circle":
            cr, ci = d.get("center", [0.0, 0.0])
            return cls.circle(complex(cr, ci), d.get("radius", 1.0), resolution)
        if kind == "torus_grid":
            return cls.torus_grid(int(d["n"]), resolution)
        if kind == "point_cloud":
            rows = [[complex(re, im) for re, im in row] for row in d["points"]]
            return cls.point_cloud(rows, n=int(d.get("n", len(rows[0]))))
        raise ValueError(f"unknown set kind {kind!r}")


def _dedupe_exact(points: np.ndarray) -> np.ndarray:
    seen: set = set()
    keep = []
    for i, row in enumerate(points):
        key = tuple(row.tolist())
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return points[keep]


def discretize(spec: CompactSetSpec) -> np.ndarray:
    """Deterministic candidate grid for K, duplicates removed by exact equality."""
    if spec.kind == "interval_union":
        pieces = []
        for a, b in spec.intervals:
            if b == a:
                pieces.append(np.array([a]))
            else:
                count = int(round((b - a) * spec.resolution)) + 1
                pieces.append(np.linspace(a, b, max(count, 2)))
        grid = np.concatenate(pieces)
        pts = grid.astype(complex).reshape(-1, 1)
    elif spec.kind == "circle":
        angles = 2.0 * np.pi * np.arange(spec.resolution) / spec.resolution
        pts = (spec.center + spec.radius * np.exp(1j * angles)).reshape(-1, 1)
    elif spec.kind == "torus_grid":
        angles = 2.0 * np.pi * np.arange(spec.resolution) / spec.resolution
        axis = np.exp(1j * angles)
        mesh = np.meshgrid(*([axis] * spec.n), indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    else:  # point_cloud
        pts = np.array(spec.points, dtype=complex).reshape(-1, spec.n)
    pts = _dedupe_exact(pts)
    if pts.shape[0] == 0:
        raise ValueError("empty candidate grid")
    if not np.isfinite(pts).all():
        raise ValueError("candidate grid contains non-finite coordinates")
    pts.setflags(write=False)
    return pts


def grid_cell_sizes(spec: CompactSetSpec) -> np.ndarray:
    """Per-candidate cell lengths for univariate grids (continuum-mode energies).

    Real grids get half-gap Voronoi cells (endpoint cells are half-width);
    circles get the uniform arc length.
    """
    pts = discretize(spec)
    if spec.kind == "circle":
        return np.full(pts.shape[0], 2.0 * np.pi * spec.radius / pts.shape[0])
    if spec.ambient_n != 1:
        raise ValueError("cell sizes are defined for univariate grids only")
    x = pts[:, 0].real
    order = np.argsort(x)
    xs = x[order]
    cells_sorted = np.empty_like(xs)
    if len(xs) == 1:
        cells_sorted[0] = 0.0
    else:
        gaps = np.diff(xs)
        cells_sorted[0] = gaps[0] / 2
        cells_sorted[-1] = gaps[-1] / 2
        cells_sorted[1:-1] = (xs[2:] - xs[:-2]) / 2
    cells = np.empty_like(cells_sorted)
    cells[order] = cells_sorted
    return cells


# ---------------------------------------------------------------------------
# Discrete measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finitely many atoms in C^n.

    Constructors reject mass violations instead of renormalizing; use
    ``normalized()`` for explicit renormalization. ``cell_sizes`` is optional
    grid metadata used by continuum-mode energies.
    """

    atoms: np.ndarray
    masses: np.ndarray
    cell_sizes: np.ndarray | None = None

    def __post_init__(self):
        atoms = as_points(self.atoms)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if atoms.shape[0] != masses.shape[0]:
            raise ValueError("atoms and masses must have the same length")
        if masses.shape[0] == 0:
            raise ValueError("measure needs at least one atom")
        if (masses < 0).any():
            raise ValueError("masses must be nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {masses.sum()!r}, not 1 within {MASS_TOL}")
        if not np.isfinite(atoms).all():
            raise ValueError("atoms must be finite")
        atoms.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)
        if self.cell_sizes is not None:
            cells = np.asarray(self.cell_sizes, dtype=float).reshape(-1)
            if cells.shape[0] != atoms.shape[0]:
                raise ValueError("cell_sizes length mismatch")
            cells.setflags(write=False)
            object.__setattr__(self, "cell_sizes", cells)

    @property
    def n(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    @classmethod
    def point_mass(cls, z) -> "DiscreteMeasure":
        return cls(as_points([z]), np.array([1.0]))

    @classmethod
    def from_points(cls, points, cell_sizes=None) -> "DiscreteMeasure":
        """Uniform empirical measure of a point configuration."""
        pts = as_points(points)
        return cls(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]), cell_sizes)

    @classmethod
    def from_unnormalized(cls, atoms, raw_masses, cell_sizes=None) -> "DiscreteMeasure":
        raw = np.asarray(raw_masses, dtype=float)
        total = raw.sum()
        if not (total > 0):
            raise ValueError("total mass must be positive")
        return cls(as_points(atoms), raw / total, cell_sizes)

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure.from_unnormalized(self.atoms, self.masses, self.cell_sizes)

    def restricted(self, mask: np.ndarray) -> "DiscreteMeasure":
        cells = self.cell_sizes[mask] if self.cell_sizes is not None else None
        return DiscreteMeasure.from_unnormalized(self.atoms[mask], self.masses[mask], cells)

    def integrate(self, values: np.ndarray) -> float:
        """Integral of per-atom values against the measure; +inf-aware."""
        values = np.asarray(values, dtype=float)
        out = 0.0
        for m, v in zip(self.masses, values):
            if m > 0:
                if np.isinf(v):
                    return math.inf
                out += m * v
        return out

    def measure_id(self) -> str:
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.atoms).tobytes())
        h.update(np.ascontiguousarray(self.masses).tobytes())
        return h.hexdigest()[:16]

    def to_json_dict(self) -> dict:
        if self.n == 1:
            atoms = [[z.real, z.imag] for z in self.atoms[:, 0]]
        else:
            atoms = [[[z.real, z.imag] for z in row] for row in self.atoms]
        d = {"n": self.n, "atoms": atoms, "masses": self.masses.tolist()}
        if self.cell_sizes is not None:
            d["cell_sizes"] = self.cell_sizes.tolist()
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "DiscreteMeasure":
        n = int(d.get("n", 1))
        if n == 1:
            atoms = [complex(re, im) for re, im in d["atoms"]]
        else:
            atoms = [[complex(re, im) for re, im in row] for row in d["atoms"]]
        cells = d.get("cell_sizes")
        return cls(as_points(atoms), np.asarray(d["masses"], dtype=float),
                   None if cells is None else np.asarray(cells, dtype=float))


# ---------------------------------------------------------------------------
# Moments and weak-* neighborhoods
# ---------------------------------------------------------------------------

def moment_indices(n: int, degree: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All (alpha, beta) multi-index pairs with 0 <= |alpha|+|beta| <= degree."""
    variables = 2 * n
    out = []
    for total in range(degree + 1):
        for combo in combinations_with_replacement(range(variables), total):
            exps = [0] * variables
            for v in combo:
                exps[v] += 1
            out.append((tuple(exps[:n]), tuple(exps[n:])))
    return out


def _monomial_values(atoms: np.ndarray, alpha, beta) -> np.ndarray:
    vals = np.ones(atoms.shape[0])
    for i, a in enumerate(alpha):
        if a:
            vals = vals * atoms[:, i].real ** a
    for i, b in enumerate(beta):
        if b:
            vals = vals * atoms[:, i].imag ** b
    return vals


def moment(mu: DiscreteMeasure, alpha: Sequence[int], beta: Sequence[int]) -> float:
    """Integral of (Re z)^alpha (Im z)^beta against mu, by exact summation."""
    alpha = tuple(int(a) for a in alpha)
    beta = tuple(int(b) for b in beta)
    if len(alpha) != mu.n or len(beta) != mu.n:
        raise ValueError(f"multi-indices must have length n = {mu.n}")
    if any(a < 0 for a in alpha) or any(b < 0 for b in beta):
        raise ValueError("multi-indices must be nonnegative")
    return float(mu.masses @ _monomial_values(mu.atoms, alpha, beta))


def moment_vector(mu: DiscreteMeasure, degree: int) -> np.ndarray:
    """Moments for all index pairs from moment_indices(mu.n, degree), in order."""
    return np.array([moment(mu, a, b) for a, b in moment_indices(mu.n, degree)])


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Weak-* moment-box neighborhood around a center measure."""

    center: DiscreteMeasure
    moment_degree: int
    epsilon: float

    def __post_init__(self):
        if self.moment_degree < 0:
            raise ValueError("moment_degree must be >= 0")
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")

    def center_moments(self) -> np.ndarray:
        return moment_vector(self.center, self.moment_degree)


def in_neighborhood(sigma: DiscreteMeasure, G: NeighborhoodSpec) -> bool:
    """True iff every moment of sigma up to G.moment_degree is within epsilon."""
    if sigma.n != G.center.n:
        raise ValueError("ambient dimension mismatch")
    deltas = np.abs(G.center_moments() - moment_vector(sigma, G.moment_degree))
    return bool((deltas < G.epsilon).all())


def weak_star_distance(mu: DiscreteMeasure, sigma: DiscreteMeasure,
                       degree: int = MOMENT_METRIC_DEGREE) -> float:
    """Weighted moment metric: sum over |alpha|+|beta| <= degree of
    2^-(|alpha|+|beta|) |moment difference|. Zero iff all moments agree."""
    if mu.n != sigma.n:
        raise ValueError("ambient dimension mismatch")
    total = 0.0
    for alpha, beta in moment_indices(mu.n, degree):
        diff = abs(moment(mu, alpha, beta) - moment(sigma, alpha, beta))
        total += 2.0 ** -(sum(alpha) + sum(beta)) * diff
    return total
