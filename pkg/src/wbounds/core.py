"""Shared domain types, alphabet indexing, and JSON/CSV serialization.

Everything numeric is computed and stored in nats; conversion to bits is a
presentation-time division by ln 2 (see :class:`LogBase`).  All types are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

NORMALIZATION_TOL = 1e-12
CLAMP_EPS = 1e-15
MAX_PRODUCT_SIZE = 10**6

LN2 = math.log(2.0)


class InvariantError(ValueError):
    """A domain object failed one of its construction invariants."""


class LogBase(enum.Enum):
    """Unit for displayed information quantities.  Internal unit is nats."""

    NATS = "nats"
    BITS = "bits"

    def from_nats(self, x: float) -> float:
        if self is LogBase.BITS:
            return x / LN2
        return x

    @staticmethod
    def parse(name: str) -> "LogBase":
        try:
            return LogBase(name)
        except ValueError:
            raise InvariantError(f"unknown log base {name!r} (expected 'nats' or 'bits')")


def _readonly(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Alphabet / product-space indexing
# ---------------------------------------------------------------------------


def index_encode(letters: Sequence[int], alphabet_size: int) -> int:
    """Positional base-``alphabet_size`` encoding; letter 0 is most significant."""
    if alphabet_size < 1:
        raise InvariantError("alphabet_size must be positive")
    idx = 0
    for pos, letter in enumerate(letters):
        if not 0 <= letter < alphabet_size:
            raise InvariantError(
                f"letter {letter} at position {pos} out of range [0, {alphabet_size})"
            )
        idx = idx * alphabet_size + int(letter)
    return idx


def index_decode(index: int, alphabet_size: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`index_encode` for strings of length ``n``."""
    if not 0 <= index < alphabet_size**n:
        raise InvariantError(f"index {index} out of range for size {alphabet_size}^{n}")
    letters = [0] * n
    for pos in range(n - 1, -1, -1):
        index, letters[pos] = divmod(index, alphabet_size)
    return tuple(letters)


def all_index_strings(alphabet_size: int, n: int) -> np.ndarray:
    """All strings of X^n as an (alphabet_size**n, n) int array in index order."""
    size = alphabet_size**n
    if size > MAX_PRODUCT_SIZE:
        raise InvariantError(f"product space too large: {alphabet_size}^{n} > {MAX_PRODUCT_SIZE}")
    return np.array(
        np.unravel_index(np.arange(size), (alphabet_size,) * n)
    ).T.astype(np.int64)


def hamming_distance(x: Sequence[int], y: Sequence[int]) -> int:
    """Number of coordinates where the two strings differ."""
    if len(x) != len(y):
        raise InvariantError(f"length mismatch: {len(x)} vs {len(y)}")
    return int(sum(1 for a, b in zip(x, y) if a != b))


def simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """All compositions i/resolution over ``dim`` bins, as a (G, dim) float array.

    Deterministic lexicographic ordering; includes every vertex of the simplex.
    """
    if dim < 1 or resolution < 1:
        raise InvariantError("simplex_grid needs dim >= 1 and resolution >= 1")
    if dim == 1:
        return np.ones((1, 1))
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for i in range(remaining + 1):
            rec(prefix + [i], remaining - i, slots - 1)

    rec([], resolution, dim)
    return np.array(out, dtype=float) / resolution


# ---------------------------------------------------------------------------
# Probability mass functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pmf:
    """A pmf over X^n stored flat, indexed by :func:`index_encode`.

    Entries below 1e-15 after normalization are clamped to zero and the vector
    renormalized, so downstream entropy sums never see denormal noise.
    """

    alphabet_size: int
    n: int
    probs: np.ndarray

    def __post_init__(self):
        k, n = self.alphabet_size, self.n
        if k < 1 or n < 1:
            raise InvariantError("pmf: alphabet_size and n must be positive")
        size = k**n
        if size > MAX_PRODUCT_SIZE:
            raise InvariantError(f"pmf: product space {k}^{n} exceeds {MAX_PRODUCT_SIZE}")
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (size,):
            raise InvariantError(f"pmf probs: expected length {size}, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvariantError("pmf probs: non-finite entry")
        if p.min() < -NORMALIZATION_TOL:
            raise InvariantError(f"pmf probs: negative entry {p.min()!r}")
        total = float(p.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvariantError(f"pmf probs: not normalized (sum={total!r})")
        p = np.clip(p, 0.0, None) / total
        p[p < CLAMP_EPS] = 0.0
        p /= p.sum()
        object.__setattr__(self, "probs", _readonly(p))

    @property
    def size(self) -> int:
        return self.alphabet_size**self.n

    @staticmethod
    def from_probs(probs, alphabet_size: int | None = None, n: int = 1) -> "Pmf":
        probs = np.asarray(probs, dtype=float)
        if alphabet_size is None:
            alphabet_size = len(probs)
        return Pmf(alphabet_size, n, probs)

    @staticmethod
    def uniform(alphabet_size: int, n: int = 1) -> "Pmf":
        size = alphabet_size**n
        return Pmf(alphabet_size, n, np.full(size, 1.0 / size))

    @staticmethod
    def point_mass(alphabet_size: int, n: int, index: int) -> "Pmf":
        p = np.zeros(alphabet_size**n)
        p[index] = 1.0
        return Pmf(alphabet_size, n, p)

    @staticmethod
    def product(letters: Sequence["Pmf"]) -> "Pmf":
        """Product pmf over X^n from per-letter pmfs (letter 0 most significant)."""
        if not letters:
            raise InvariantError("product: need at least one letter pmf")
        k = letters[0].alphabet_size
        if any(p.alphabet_size != k or p.n != 1 for p in letters):
            raise InvariantError("product: per-letter pmfs must share one alphabet, n=1")
        flat = letters[0].probs
        for p in letters[1:]:
            flat = np.kron(flat, p.probs)
        return Pmf(k, len(letters), flat)


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Channel:
    """Stochastic kernel on finite alphabets: one output pmf per input row."""

    input_size: int
    output_size: int
    rows: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=float)
        if r.shape != (self.input_size, self.output_size):
            raise InvariantError(
                f"channel rows: expected shape {(self.input_size, self.output_size)}, got {r.shape}"
            )
        if not np.all(np.isfinite(r)) or r.min() < -NORMALIZATION_TOL:
            raise InvariantError("channel rows: entries must be finite and >= 0")
        sums = r.sum(axis=1)
        bad = np.argmax(np.abs(sums - 1.0))
        if abs(sums[bad] - 1.0) > NORMALIZATION_TOL:
            raise InvariantError(f"channel rows: row {bad} not normalized (sum={sums[bad]!r})")
        object.__setattr__(self, "rows", _readonly(np.clip(r, 0.0, None)))

    @staticmethod
    def from_rows(rows) -> "Channel":
        rows = np.asarray(rows, dtype=float)
        return Channel(rows.shape[0], rows.shape[1], rows)

    @staticmethod
    def identity(k: int) -> "Channel":
        return Channel(k, k, np.eye(k))

    @staticmethod
    def bsc(delta: float) -> "Channel":
        return Channel(2, 2, np.array([[1 - delta, delta], [delta, 1 - delta]]))


@dataclass(frozen=True)
class TwoInputChannel:
    """Per-letter kernel W(y|x,a); entries indexed [x][a][y]."""

    x_size: int
    a_size: int
    y_size: int
    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=float)
        shape = (self.x_size, self.a_size, self.y_size)
        if w.shape != shape:
            raise InvariantError(f"two-input channel: expected shape {shape}, got {w.shape}")
        if not np.all(np.isfinite(w)) or w.min() < -NORMALIZATION_TOL:
            raise InvariantError("two-input channel: entries must be finite and >= 0")
        sums = w.sum(axis=2)
        if np.abs(sums - 1.0).max() > NORMALIZATION_TOL:
            x, a = np.unravel_index(np.argmax(np.abs(sums - 1.0)), sums.shape)
            raise InvariantError(
                f"two-input channel: row (x={x}, a={a}) not normalized (sum={sums[x, a]!r})"
            )
        object.__setattr__(self, "entries", _readonly(np.clip(w, 0.0, None)))

    def subchannel(self, x: int) -> Channel:
        """The a-indexed kernel W(.|x, a) for one fixed x."""
        return Channel(self.a_size, self.y_size, self.entries[x])

    @staticmethod
    def additive_mod(noise: Pmf, x_size: int, a_size: int) -> "TwoInputChannel":
        """W(y|x,a) = noise((y - x - a) mod k) on the cyclic group Z_k."""
        if noise.n != 1:
            raise InvariantError("additive_mod noise must be a single-letter pmf")
        k = noise.alphabet_size
        w = np.zeros((x_size, a_size, k))
        for x in range(x_size):
            for a in range(a_size):
                for y in range(k):
                    w[x, a, y] = noise.probs[(y - x - a) % k]
        return TwoInputChannel(x_size, a_size, k, w)


# ---------------------------------------------------------------------------
# One-dimensional Gaussian mixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianMixture1D:
    """Finite mixture of 1-D Gaussians; variance 0 marks a pure atom.

    Atoms are only meant as pre-smoothing inputs; density-based operations
    require strictly positive component variances.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        m = np.asarray(self.means, dtype=float)
        v = np.asarray(self.variances, dtype=float)
        if not (w.shape == m.shape == v.shape) or w.ndim != 1 or len(w) == 0:
            raise InvariantError("mixture: weights/means/variances must be equal-length 1-D")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(m)) or not np.all(np.isfinite(v)):
            raise InvariantError("mixture: non-finite component")
        if w.min() < -NORMALIZATION_TOL or v.min() < 0.0:
            raise InvariantError("mixture: weights must be >= 0 and variances >= 0")
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise InvariantError(f"mixture weights: not normalized (sum={w.sum()!r})")
        w = np.clip(w, 0.0, None)
        object.__setattr__(self, "weights", _readonly(w / w.sum()))
        object.__setattr__(self, "means", _readonly(m))
        object.__setattr__(self, "variances", _readonly(v))

    @staticmethod
    def single(mean: float, var: float) -> "GaussianMixture1D":
        return GaussianMixture1D(np.array([1.0]), np.array([mean]), np.array([var]))

    @staticmethod
    def from_components(components: Iterable[tuple[float, float, float]]) -> "GaussianMixture1D":
        comp = list(components)
        w = np.array([c[0] for c in comp])
        m = np.array([c[1] for c in comp])
        v = np.array([c[2] for c in comp])
        return GaussianMixture1D(w, m, v)

    @staticmethod
    def atoms(positions, weights) -> "GaussianMixture1D":
        positions = np.asarray(positions, dtype=float)
        return GaussianMixture1D(np.asarray(weights, dtype=float), positions, np.zeros_like(positions))

    @property
    def is_smooth(self) -> bool:
        return bool(self.variances.min() > 0.0)

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    def second_moment(self) -> float:
        return float(np.dot(self.weights, self.means**2 + self.variances))

    def mean_abs(self) -> float:
        """E|X| in closed form (per component: folded-normal mean)."""
        total = 0.0
        for w, m, v in zip(self.weights, self.means, self.variances):
            if v == 0.0:
                total += w * abs(m)
            else:
                s = math.sqrt(v)
                total += w * (
                    m * math.erf(m / (s * math.sqrt(2.0)))
                    + s * math.sqrt(2.0 / math.pi) * math.exp(-m * m / (2.0 * v))
                )
        return total

    def sigma_max(self) -> float:
        return float(np.sqrt(self.variances.max()))

    def support_span(self) -> tuple[float, float]:
        return float(self.means.min()), float(self.means.max())

    def logpdf(self, x) -> np.ndarray:
        """Log density with max-exponent factoring; requires all variances > 0."""
        if not self.is_smooth:
            raise InvariantError("logpdf undefined: mixture contains atoms")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = x[:, None] - self.means[None, :]
        expo = (
            -0.5 * z * z / self.variances[None, :]
            - 0.5 * np.log(2.0 * math.pi * self.variances)[None, :]
            + np.log(self.weights, where=self.weights > 0, out=np.full_like(self.weights, -np.inf))[None, :]
        )
        peak = expo.max(axis=1, keepdims=True)
        peak = np.where(np.isfinite(peak), peak, 0.0)
        return (peak[:, 0] + np.log(np.exp(expo - peak).sum(axis=1)))

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def cdf(self, x) -> np.ndarray:
        """Mixture CDF; atoms contribute right-continuous steps."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for w, m, v in zip(self.weights, self.means, self.variances):
            if v == 0.0:
                out += w * (x >= m)
            else:
                out += w * ndtr((x - m) / math.sqrt(v))
        return out


# ---------------------------------------------------------------------------
# Coupling plans and region curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingPlan:
    """A transportation plan plus its cost and certifying dual potentials."""

    joint: np.ndarray
    cost_value: float
    row_potentials: np.ndarray
    col_potentials: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.joint, dtype=float)
        if j.ndim != 2:
            raise InvariantError("coupling joint must be a matrix")
        if j.min() < -1e-12:
            raise InvariantError(f"coupling joint: negative mass {j.min()!r}")
        object.__setattr__(self, "joint", _readonly(np.clip(j, 0.0, None)))
        object.__setattr__(self, "row_potentials", _readonly(self.row_potentials))
        object.__setattr__(self, "col_potentials", _readonly(self.col_potentials))


@dataclass(frozen=True)
class RegionCurve:
    """Ordered (R1, R2) samples of a rate-region boundary, in nats."""

    points: tuple
    kind: str

    def __post_init__(self):
        if self.kind not in ("inner", "outer"):
            raise InvariantError(f"region curve kind must be inner|outer, got {self.kind!r}")
        pts = tuple((float(r1), float(r2)) for r1, r2 in self.points)
        if not pts:
            raise InvariantError("region curve must contain at least one point")
        object.__setattr__(self, "points", pts)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvariantError(f"cannot parse {path}: {exc}") from exc


def _require(obj: dict, field: str, path):
    if field not in obj:
        raise InvariantError(f"{path}: missing field {field!r}")
    return obj[field]


def load_pmf(path) -> Pmf:
    obj = _load_json(path)
    k = _require(obj, "alphabet_size", path)
    n = _require(obj, "n", path)
    probs = _require(obj, "probs", path)
    try:
        return Pmf(int(k), int(n), np.asarray(probs, dtype=float))
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def save_pmf(pmf: Pmf, path) -> None:
    obj = {"alphabet_size": pmf.alphabet_size, "n": pmf.n, "probs": pmf.probs.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def load_channel(path) -> Channel:
    obj = _load_json(path)
    try:
        return Channel(
            int(_require(obj, "input_size", path)),
            int(_require(obj, "output_size", path)),
            np.asarray(_require(obj, "rows", path), dtype=float),
        )
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def save_channel(channel: Channel, path) -> None:
    obj = {
        "input_size": channel.input_size,
        "output_size": channel.output_size,
        "rows": channel.rows.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def load_two_input_channel(path) -> TwoInputChannel:
    obj = _load_json(path)
    try:
        return TwoInputChannel(
            int(_require(obj, "x_size", path)),
            int(_require(obj, "a_size", path)),
            int(_require(obj, "y_size", path)),
            np.asarray(_require(obj, "entries", path), dtype=float),
        )
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def save_two_input_channel(channel: TwoInputChannel, path) -> None:
    obj = {
        "x_size": channel.x_size,
        "a_size": channel.a_size,
        "y_size": channel.y_size,
        "entries": channel.entries.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def load_mixture(path) -> GaussianMixture1D:
    obj = _load_json(path)
    comps = _require(obj, "components", path)
    try:
        return GaussianMixture1D(
            np.array([_require(c, "w", path) for c in comps], dtype=float),
            np.array([_require(c, "mean", path) for c in comps], dtype=float),
            np.array([_require(c, "var", path) for c in comps], dtype=float),
        )
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def save_mixture(mix: GaussianMixture1D, path) -> None:
    obj = {
        "components": [
            {"w": float(w), "mean": float(m), "var": float(v)}
            for w, m, v in zip(mix.weights, mix.means, mix.variances)
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def format_float(x: float) -> str:
    """12 significant digits, '.' separator, locale-independent."""
    return format(float(x), ".12g")


def save_region(curves: Sequence[RegionCurve], path, base: LogBase = LogBase.NATS) -> None:
    """Write curves interleaved into one CSV with header R1,R2,kind,base."""
    lines = ["R1,R2,kind,base"]
    for curve in curves:
        for r1, r2 in curve.points:
            lines.append(
                f"{format_float(base.from_nats(r1))},{format_float(base.from_nats(r2))},"
                f"{curve.kind},{base.value}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
