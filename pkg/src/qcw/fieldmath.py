"""Binary-field and polynomial arithmetic, Hamming metrics and entropy measures.

Field elements of GF(2^kappa) are plain integers below ``2**kappa`` when
used through a :class:`GF2k` instance; :class:`FieldElem` is the tagged
variant that carries its field size and refuses to mix fields.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ParameterError

# Fixed reduction polynomials, bit i = coefficient of x^i.
IRREDUCIBLE = {
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    8: 0x11B,  # x^8 + x^4 + x^3 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
    32: 0x1_0000_008D,  # x^32 + x^7 + x^3 + x^2 + 1
}

_FIELDS: dict[int, "GF2k"] = {}


def clmul_reduce(a: int, b: int, kappa: int, poly: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced modulo ``poly``."""
    result = 0
    top = 1 << kappa
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return result


class GF2k:
    """The field GF(2^kappa) for a kappa from :data:`IRREDUCIBLE`.

    Multiplication uses log/antilog tables up to kappa = 16 and
    shift-and-add reduction above that.
    """

    def __init__(self, kappa: int):
        if kappa not in IRREDUCIBLE:
            raise ParameterError(f"unsupported field size kappa={kappa}; choose from {sorted(IRREDUCIBLE)}")
        self.kappa = kappa
        self.poly = IRREDUCIBLE[kappa]
        self.order = 1 << kappa
        self._log = None
        self._exp = None
        if kappa <= 16:
            self._build_tables()

    @classmethod
    def get(cls, kappa: int) -> "GF2k":
        field = _FIELDS.get(kappa)
        if field is None:
            field = _FIELDS[kappa] = cls(kappa)
        return field

    def _build_tables(self):
        q = self.order
        for g in range(2, q):
            exp = [0] * (2 * q)
            x = 1
            seen_one_early = False
            for i in range(q - 1):
                exp[i] = x
                x = clmul_reduce(x, g, self.kappa, self.poly)
                if x == 1 and i < q - 2:
                    seen_one_early = True
                    break
            if not seen_one_early:
                break
        else:  # pragma: no cover - every listed field has a generator
            raise RuntimeError("no generator found")
        for i in range(q - 1, 2 * q):
            exp[i] = exp[i - (q - 1)]
        log = [0] * q
        for i in range(q - 1):
            log[exp[i]] = i
        self._exp = exp
        self._log = log
        self.generator = g

    def __repr__(self):
        return f"GF2k({self.kappa})"

    def check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise ParameterError(f"{a} is not an element of GF(2^{self.kappa})")
        return a

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return clmul_reduce(a, b, self.kappa, self.poly)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        if self._exp is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def random(self, rng: np.random.Generator, size=None):
        if size is None:
            return int(rng.integers(0, self.order))
        return [int(v) for v in rng.integers(0, self.order, size=size)]


@dataclass(frozen=True)
class FieldElem:
    """An element of GF(2^kappa) that remembers its field."""

    value: int
    kappa: int

    def __post_init__(self):
        if self.kappa not in IRREDUCIBLE:
            raise ParameterError(f"unsupported field size kappa={self.kappa}")
        if not 0 <= self.value < (1 << self.kappa):
            raise ParameterError(f"value {self.value} out of range for kappa={self.kappa}")

    @property
    def field(self) -> GF2k:
        return GF2k.get(self.kappa)

    def _same(self, other: "FieldElem"):
        if not isinstance(other, FieldElem):
            return NotImplemented
        if other.kappa != self.kappa:
            raise ParameterError(f"field mismatch: kappa {self.kappa} vs {other.kappa}")
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return FieldElem(self.value ^ other.value, self.kappa)

    __sub__ = __add__

    def __mul__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return FieldElem(self.field.mul(self.value, other.value), self.kappa)

    def inverse(self) -> "FieldElem":
        return FieldElem(self.field.inv(self.value), self.kappa)


def gf_mul(a: FieldElem, b: FieldElem) -> FieldElem:
    """Field product; raises :class:`ParameterError` when the fields differ."""
    if a.kappa != b.kappa:
        raise ParameterError(f"field mismatch: kappa {a.kappa} vs {b.kappa}")
    return a * b


class Poly:
    """Polynomial over GF(2^kappa) with integer coefficients, lowest degree first."""

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs: Iterable[int], field: GF2k):
        coeffs = [field.check(int(c)) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.field = field
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def __call__(self, x: int) -> int:
        mul = self.field.mul
        acc = 0
        for c in reversed(self.coeffs):
            acc = mul(acc, x) ^ c
        return acc

    def __eq__(self, other):
        return isinstance(other, Poly) and self.field.kappa == other.field.kappa and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field.kappa, self.coeffs))

    def __repr__(self):
        return f"Poly({list(self.coeffs)}, kappa={self.field.kappa})"


def _as_points(points) -> tuple[GF2k, list[tuple[int, int]]]:
    if not points:
        raise ParameterError("need at least one point")
    x0 = points[0][0]
    if isinstance(x0, FieldElem):
        kappa = x0.kappa
        raw = []
        for x, y in points:
            if x.kappa != kappa or y.kappa != kappa:
                raise ParameterError("points from different fields")
            raw.append((x.value, y.value))
        return GF2k.get(kappa), raw
    raise ParameterError("points must be FieldElem pairs; use interpolate() for raw integers")


def interpolate(field: GF2k, xs: Sequence[int], ys: Sequence[int]) -> Poly:
    """Lagrange interpolation over ``field`` on integer-coded elements."""
    if len(xs) != len(ys):
        raise ParameterError("xs and ys differ in length")
    if len(set(xs)) != len(xs):
        raise ParameterError("duplicate x-coordinates")
    n = len(xs)
    mul = field.mul
    coeffs = [0] * n
    for j in range(n):
        if ys[j] == 0:
            continue
        # basis polynomial prod_{m != j} (X - x_m) / (x_j - x_m)
        basis = [1]
        denom = 1
        for m in range(n):
            if m == j:
                continue
            xm = xs[m]
            nxt = [0] * (len(basis) + 1)
            for i, c in enumerate(basis):
                nxt[i + 1] ^= c
                nxt[i] ^= mul(c, xm)
            basis = nxt
            denom = mul(denom, xs[j] ^ xm)
        scale = mul(ys[j], field.inv(denom))
        for i, c in enumerate(basis):
            coeffs[i] ^= mul(c, scale)
    return Poly(coeffs, field)


def lagrange_interpolate(points: Sequence[tuple[FieldElem, FieldElem]]) -> Poly:
    """Unique polynomial of degree < len(points) through the given points."""
    field, raw = _as_points(points)
    xs = [x for x, _ in raw]
    ys = [y for _, y in raw]
    return interpolate(field, xs, ys)


def evaluate_through(field: GF2k, xs: Sequence[int], ys: Sequence[int], targets: Sequence[int]) -> list[int]:
    """Evaluate the interpolating polynomial of (xs, ys) at ``targets`` without forming it."""
    mul = field.mul
    inv = field.inv
    n = len(xs)
    weights = []
    for j in range(n):
        d = 1
        for m in range(n):
            if m != j:
                d = mul(d, xs[j] ^ xs[m])
        weights.append(inv(d))
    out = []
    for t in targets:
        acc = 0
        for j in range(n):
            if ys[j] == 0:
                continue
            term = mul(ys[j], weights[j])
            for m in range(n):
                if m != j:
                    term = mul(term, t ^ xs[m])
            acc ^= term
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# Hamming metrics


def _bits(x) -> np.ndarray:
    if isinstance(x, str):
        return np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    return np.asarray(x, dtype=np.uint8)


def hamming(x, y) -> int:
    """Number of positions where ``x`` and ``y`` differ."""
    a, b = _bits(x), _bits(y)
    if a.shape != b.shape:
        raise ParameterError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))


def relative_hamming(x, y) -> float:
    a = _bits(x)
    if a.size == 0:
        raise ParameterError("relative distance of empty strings is undefined")
    return hamming(x, y) / a.size


# ---------------------------------------------------------------------------
# Entropies


def binary_entropy(mu: float) -> float:
    """h(mu) in bits for 0 <= mu <= 1/2."""
    if not 0.0 <= mu <= 0.5:
        raise ParameterError(f"mu must lie in [0, 1/2], got {mu}")
    if mu == 0:
        return 0.0
    return -(mu * math.log2(mu) + (1 - mu) * math.log2(1 - mu))


class Distribution:
    """Finite distribution over hashable outcomes (bit-strings, tuples, ...).

    Probabilities may be :class:`fractions.Fraction` (checked exactly) or
    floats (checked to 1e-12).
    """

    def __init__(self, probs: Mapping[Hashable, float | Fraction]):
        cleaned = {}
        for k, p in probs.items():
            if p < 0:
                raise ParameterError(f"negative probability for {k!r}")
            if p:
                cleaned[k] = p
        total = sum(cleaned.values())
        if all(isinstance(p, Fraction) for p in cleaned.values()) and cleaned:
            ok = total == 1
        else:
            ok = abs(float(total) - 1.0) <= 1e-12
        if not ok:
            raise ParameterError(f"probabilities sum to {float(total)!r}, not 1")
        self.probs = cleaned

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable]) -> "Distribution":
        outcomes = list(outcomes)
        if not outcomes:
            raise ParameterError("empty distribution")
        p = Fraction(1, len(outcomes))
        return cls({o: p for o in outcomes})

    def __len__(self):
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs.items())

    def marginal(self, index: int) -> "Distribution":
        out: dict = {}
        for k, p in self.probs.items():
            out[k[index]] = out.get(k[index], 0) + p
        return Distribution(out)


def min_entropy(d: Distribution) -> float:
    """-log2 of the largest outcome probability."""
    if not d.probs:
        raise ParameterError("empty distribution")
    return -math.log2(float(max(d.probs.values())))


def max_entropy_support(d: Distribution) -> float:
    """log2 of the support size."""
    if not d.probs:
        raise ParameterError("empty distribution")
    return math.log2(len(d.probs))


@dataclass
class SplitWitness:
    """Outcome of searching for a splitting variable K."""

    found: bool
    assignment: dict  # (x0, x1) -> k
    entropy: float  # H_min(X_{1-K} K) achieved by ``assignment``
    method: str  # "canonical", "exhaustive" or "none"


def split_entropy(joint: Distribution, assignment: Mapping) -> float:
    """H_min(X_{1-K} K) for a deterministic K given as a map over the support."""
    mass: dict = {}
    for (x0, x1), p in joint:
        k = assignment[(x0, x1)]
        key = (k, x1 if k == 0 else x0)  # X_{1-K}: K=0 keeps X1, K=1 keeps X0
        mass[key] = mass.get(key, 0) + p
    return -math.log2(float(max(mass.values())))


def min_entropy_split_witness(joint: Distribution, alpha: float | None = None, exhaustive_limit: int = 16) -> SplitWitness:
    """Find K(x0, x1) with H_min(X_{1-K} K) >= alpha/2.

    ``alpha`` defaults to H_min(X0 X1). The canonical rule sets K=1 exactly
    when the X0-marginal of x0 is at most 2^(-alpha/2); if that ever fell
    short, every K-map is tried on supports up to ``exhaustive_limit``.
    """
    if alpha is None:
        alpha = min_entropy(joint)
    target = alpha / 2
    tol = 1e-12
    p0 = joint.marginal(0).probs
    threshold = 2.0 ** (-target)
    canonical = {(x0, x1): int(float(p0[x0]) <= threshold * (1 + tol)) for (x0, x1), _ in joint}
    h = split_entropy(joint, canonical)
    if h >= target - 1e-9:
        return SplitWitness(True, canonical, h, "canonical")
    support = [k for k, _ in joint]
    best = SplitWitness(False, canonical, h, "none")
    if len(support) <= exhaustive_limit:
        for bits in itertools.product((0, 1), repeat=len(support)):
            assignment = dict(zip(support, bits))
            h = split_entropy(joint, assignment)
            if h >= target - 1e-9:
                return SplitWitness(True, assignment, h, "exhaustive")
    return best


@dataclass(frozen=True)
class BallBound:
    bound: float  # 2^{h(mu) n}
    exact: int  # sum_{k <= mu n} C(n, k)


def hamming_ball_bound(n: int, mu: float) -> BallBound:
    """Upper bound 2^{h(mu)n} on the radius-mu*n Hamming ball, with the exact size."""
    h = binary_entropy(mu)
    radius = math.floor(mu * n + 1e-12)
    exact = sum(math.comb(n, k) for k in range(radius + 1))
    return BallBound(2.0 ** (h * n), exact)


def solve_linear(field: GF2k, rows: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[int] | None:
    """Solve ``rows @ v = rhs`` over ``field`` by Gaussian elimination.

    Returns one solution (free variables set to zero) or ``None`` when the
    system is inconsistent.
    """
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    mul, inv = field.mul, field.inv
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if aug[i][c]), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        scale = inv(aug[r][c])
        aug[r] = [mul(v, scale) for v in aug[r]]
        for i in range(n_rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a ^ mul(f, b) for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for i in range(r, n_rows):
        if aug[i][n_cols]:
            return None
    solution = [0] * n_cols
    for i, c in enumerate(pivots):
        solution[c] = aug[i][n_cols]
    return solution
