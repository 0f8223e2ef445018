"""Hyperbolic {p,q} triangle groups as exact 3x3 matrices over Z[xi].

The full triangle group is generated by three reflections s_x, s_y, s_z
acting on a rank-3 lattice equipped with the Coxeter bilinear form; the
rotation subgroup is generated by A = s_x s_y (order p) and B = s_y s_z
(order q), with (AB)^2 = 1.  All matrix entries live in Z[xi_n] for a
single n = ring_index(p, q), so group elements compare exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cache

import numpy as np

from .errors import ConfigError
from .ring import RingContext, RingElem, make_context, rescaled_chebyshev

__all__ = [
    "GEN_A",
    "GEN_A_INV",
    "GEN_B",
    "GEN_B_INV",
    "TOKEN_CHARS",
    "inverse_token",
    "inverse_word",
    "word_str",
    "parse_word",
    "TessellationParams",
    "ring_index",
    "GroupMatrix",
    "reflection_generators",
    "rotation_generators",
    "Generators",
    "build_generators",
    "word_to_matrix",
    "Ball",
    "ball_enumerate",
    "export_ball_jsonl",
]

# Generator tokens, in the fixed enumeration order used everywhere
GEN_A, GEN_A_INV, GEN_B, GEN_B_INV = 0, 1, 2, 3
TOKEN_CHARS = "aAbB"
_INVERSE = (GEN_A_INV, GEN_A, GEN_B_INV, GEN_B)


def inverse_token(t: int) -> int:
    return _INVERSE[t]


def inverse_word(word: tuple) -> tuple:
    return tuple(_INVERSE[t] for t in reversed(word))


def word_str(word: tuple) -> str:
    """Encode a word over {A, A^-1, B, B^-1} as 'a', 'A', 'b', 'B' chars."""
    return "".join(TOKEN_CHARS[t] for t in word)


def parse_word(s: str) -> tuple:
    try:
        return tuple(TOKEN_CHARS.index(ch) for ch in s)
    except ValueError:
        raise ConfigError(f"invalid word string {s!r}; alphabet is 'aAbB'") from None


@dataclass(frozen=True)
class TessellationParams:
    """Schläfli parameters {p, q} of a hyperbolic tessellation."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 3 or self.q < 3:
            raise ConfigError(f"need p, q >= 3, got p={self.p}, q={self.q}")
        # hyperbolic iff 1/p + 1/q < 1/2, checked in integers
        if 2 * (self.p + self.q) >= self.p * self.q:
            raise ConfigError(
                f"{{{self.p},{self.q}}} is not hyperbolic: "
                f"1/p + 1/q must be below 1/2"
            )


def ring_index(p: int, q: int) -> int:
    """Smallest n such that both 2cos(pi/p) and 2cos(pi/q) lie in Z[xi_n]."""
    if p < 3 or q < 3:
        raise ConfigError(f"need p, q >= 3, got p={p}, q={q}")
    if q == 3 or p == q:
        return 2 * p
    if p == 3:
        return 2 * q
    return 2 * p * q


def _cosine_pair(p: int, q: int, ctx: RingContext) -> tuple[RingElem, RingElem]:
    """(2cos(pi/p), 2cos(pi/q)) as exact elements of Z[xi_n]."""
    if q == 3 or p == q:
        a = ctx.xi()
        b = a if p == q else ctx.one()
    elif p == 3:
        a = ctx.one()
        b = ctx.xi()
    else:
        # 2cos(pi/p) = P_q(xi_2pq) and 2cos(pi/q) = P_p(xi_2pq)
        a = ctx.element(ctx.reduce_poly(rescaled_chebyshev(q).coeffs))
        b = ctx.element(ctx.reduce_poly(rescaled_chebyshev(p).coeffs))
    return a, b


class GroupMatrix:
    """3x3 matrix over Z[xi_n], row-major tuple of 9 RingElem."""

    __slots__ = ("ctx", "entries")

    def __init__(self, ctx: RingContext, entries):
        entries = tuple(entries)
        if len(entries) != 9:
            raise ValueError("expected 9 entries")
        self.ctx = ctx
        self.entries = entries

    @classmethod
    def identity(cls, ctx: RingContext) -> "GroupMatrix":
        one, zero = ctx.one(), ctx.zero()
        return cls(ctx, [one if i == j else zero for i in range(3) for j in range(3)])

    @classmethod
    def from_rows(cls, ctx: RingContext, rows) -> "GroupMatrix":
        return cls(ctx, [e for row in rows for e in row])

    def __getitem__(self, ij) -> RingElem:
        i, j = ij
        return self.entries[3 * i + j]

    def __matmul__(self, other: "GroupMatrix") -> "GroupMatrix":
        if self.ctx.n != other.ctx.n:
            raise ValueError("ring contexts differ")
        a, b = self.entries, other.entries
        out = []
        for i in range(3):
            for j in range(3):
                acc = a[3 * i] * b[j]
                acc = acc + a[3 * i + 1] * b[3 + j]
                acc = acc + a[3 * i + 2] * b[6 + j]
                out.append(acc)
        return GroupMatrix(self.ctx, out)

    def pow(self, k: int) -> "GroupMatrix":
        if k < 0:
            raise ValueError("negative powers need an explicit inverse")
        acc = GroupMatrix.identity(self.ctx)
        for _ in range(k):
            acc = acc @ self
        return acc

    def det(self) -> RingElem:
        e = self.entries
        return (
            e[0] * (e[4] * e[8] - e[5] * e[7])
            - e[1] * (e[3] * e[8] - e[5] * e[6])
            + e[2] * (e[3] * e[7] - e[4] * e[6])
        )

    def transpose(self) -> "GroupMatrix":
        e = self.entries
        return GroupMatrix(self.ctx, [e[0], e[3], e[6], e[1], e[4], e[7], e[2], e[5], e[8]])

    def key(self) -> tuple:
        """Canonical hashable serialization: the 9*d exact coefficients."""
        return tuple(c for e in self.entries for c in e.coeffs)

    def numeric(self) -> np.ndarray:
        return np.array([e.eval_real() for e in self.entries], dtype=float).reshape(3, 3)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupMatrix)
            and other.ctx.n == self.ctx.n
            and other.entries == self.entries
        )

    def __hash__(self) -> int:
        return hash((self.ctx.n, self.key()))

    def __repr__(self) -> str:
        return f"GroupMatrix(n={self.ctx.n}, {[list(e.coeffs) for e in self.entries]})"


def reflection_generators(p: int, q: int, ctx: RingContext | None = None):
    """The three reflections (s_x, s_y, s_z) as exact matrices.

    Defined for any p, q >= 3; hyperbolicity is enforced by the
    tessellation-level entry points, not here.
    """
    if ctx is None:
        ctx = make_context(ring_index(p, q))
    a, b = _cosine_pair(p, q, ctx)
    one, zero = ctx.one(), ctx.zero()
    neg = -one
    sx = GroupMatrix.from_rows(ctx, [[neg, a, zero], [zero, one, zero], [zero, zero, one]])
    sy = GroupMatrix.from_rows(ctx, [[one, zero, zero], [a, neg, b], [zero, zero, one]])
    sz = GroupMatrix.from_rows(ctx, [[one, zero, zero], [zero, one, zero], [zero, b, neg]])
    return sx, sy, sz


def rotation_generators(p: int, q: int, ctx: RingContext | None = None):
    """Rotation generators A = s_x s_y (order p) and B = s_y s_z (order q)."""
    if ctx is None:
        ctx = make_context(ring_index(p, q))
    sx, sy, sz = reflection_generators(p, q, ctx)
    return sx @ sy, sy @ sz


@dataclass(frozen=True)
class Generators:
    """Bundle of exact generator data for one {p, q} group."""

    p: int
    q: int
    ctx: RingContext
    A: GroupMatrix
    A_inv: GroupMatrix
    B: GroupMatrix
    B_inv: GroupMatrix

    def token_matrix(self, t: int) -> GroupMatrix:
        return (self.A, self.A_inv, self.B, self.B_inv)[t]


@cache
def build_generators(p: int, q: int) -> Generators:
    ctx = make_context(ring_index(p, q))
    A, B = rotation_generators(p, q, ctx)
    # inverses via the torsion relations A^p = B^q = 1
    return Generators(p, q, ctx, A, A.pow(p - 1), B, B.pow(q - 1))


def word_to_matrix(word: tuple, gens: Generators) -> GroupMatrix:
    acc = GroupMatrix.identity(gens.ctx)
    for t in word:
        acc = acc @ gens.token_matrix(t)
    return acc


# ---------------------------------------------------------------------------
# Batched exact arithmetic.
#
# A matrix is flattened to shape (3, 3d): row i, column l*d + r holds
# coefficient r of entry (i, l).  Right multiplication by a fixed matrix g
# is then a single integer matmul with a (3d, 3d) table
#     K[(l, r), (j, s)] = sum_t g[l][j].coeffs[t] * (xi^(r+t))_s
# which lets numpy process whole BFS frontiers at once.  int64 is used
# while safe; the same code runs on object (big-int) arrays once
# coefficients approach overflow.


def matrix_to_flat(mat: GroupMatrix) -> np.ndarray:
    d = mat.ctx.d
    out = np.zeros((3, 3 * d), dtype=object)
    for i in range(3):
        for l in range(3):
            out[i, l * d : (l + 1) * d] = mat.entries[3 * i + l].coeffs
    return out


def flat_to_matrix(ctx: RingContext, flat: np.ndarray) -> GroupMatrix:
    d = ctx.d
    entries = []
    for i in range(3):
        for l in range(3):
            entries.append(RingElem(ctx, [int(v) for v in flat[i, l * d : (l + 1) * d]]))
    return GroupMatrix(ctx, entries)


def flat_key(flat_row: np.ndarray) -> tuple:
    return tuple(int(v) for v in flat_row.ravel())


def right_mult_table(mat: GroupMatrix) -> list:
    """Exact (3d, 3d) table of right multiplication by mat, as Python ints."""
    ctx = mat.ctx
    d = ctx.d
    K = [[0] * (3 * d) for _ in range(3 * d)]
    for l in range(3):
        for j in range(3):
            entry = mat.entries[3 * l + j].coeffs
            for r in range(d):
                row = K[l * d + r]
                for t, g_t in enumerate(entry):
                    if g_t:
                        for s, ps in enumerate(ctx.power(r + t)):
                            if ps:
                                row[j * d + s] += g_t * ps
    return K


class RightMultiplier:
    """Applies right multiplication by a fixed exact matrix to flat batches.

    Uses int64 matmuls with an overflow guard, falling back to object
    (arbitrary precision) arrays when inputs are too large.
    """

    def __init__(self, mat: GroupMatrix):
        self.ctx = mat.ctx
        K = right_mult_table(mat)
        self._K_obj = np.array(K, dtype=object)
        self._max_k = max((max(abs(v) for v in row) for row in K), default=0)
        self._K_i64 = None
        if self._max_k < 2**62:
            self._K_i64 = np.array(K, dtype=np.int64)
        width = 3 * self.ctx.d
        # |out| <= width * max|in| * max|K|; stay well under 2^63
        if self._max_k > 0 and self._K_i64 is not None:
            self._safe_in = (2**62) // (width * self._max_k)
        else:
            self._safe_in = 0

    def apply(self, batch: np.ndarray) -> np.ndarray:
        """batch: (..., 3, 3d) integer array; returns the same shape."""
        shape = batch.shape
        flat = batch.reshape(-1, shape[-1])
        if (
            self._K_i64 is not None
            and flat.dtype != object
            and (self._safe_in == 0 or int(np.abs(flat).max(initial=0)) <= self._safe_in)
        ):
            out = flat.astype(np.int64) @ self._K_i64
        else:
            out = flat.astype(object) @ self._K_obj
        return out.reshape(shape)


class Ball:
    """Word-metric ball in the rotation group, enumerated breadth-first.

    Elements are stored exactly; index 0 is the identity and layers are
    ordered by increasing word length, with the generator order
    A, A^-1, B, B^-1 fixing the order inside a layer.
    """

    def __init__(self, gens: Generators, radius: int, flats, parents, tokens, layer_sizes):
        self.gens = gens
        self.params = TessellationParams(gens.p, gens.q)
        self.radius = radius
        self._flats = flats            # list of (3, 3d) object/int arrays
        self._parents = parents        # parent index per element (-1 for id)
        self._tokens = tokens          # discovery token per element
        self.layer_sizes = layer_sizes # elements per word length 0..radius
        self.index = {flat_key(f): i for i, f in enumerate(self._flats)}

    def __len__(self) -> int:
        return len(self._flats)

    def flat(self, i: int) -> np.ndarray:
        return self._flats[i]

    def matrix(self, i: int) -> GroupMatrix:
        return flat_to_matrix(self.gens.ctx, self._flats[i])

    def word(self, i: int) -> tuple:
        out = []
        while i > 0:
            out.append(self._tokens[i])
            i = self._parents[i]
        return tuple(reversed(out))

    def word_length(self, i: int) -> int:
        return len(self.word(i))

    def batch(self) -> np.ndarray:
        """All elements stacked as an (n, 3, 3d) array."""
        return np.stack(self._flats)

    def lookup(self, flat_row: np.ndarray) -> int:
        """Index of an exact flat matrix, or -1 if outside the ball."""
        return self.index.get(flat_key(flat_row), -1)


def ball_enumerate(p: int, q: int, radius: int, gens: Generators | None = None) -> Ball:
    """All group elements of word length <= radius, by exact BFS."""
    TessellationParams(p, q)
    if radius < 0:
        raise ConfigError("radius must be nonnegative")
    if gens is None:
        gens = build_generators(p, q)
    multipliers = [RightMultiplier(gens.token_matrix(t)) for t in range(4)]

    ident = matrix_to_flat(GroupMatrix.identity(gens.ctx))
    flats = [ident]
    parents = [-1]
    tokens = [-1]
    seen = {flat_key(ident): 0}
    layer_sizes = [1]
    frontier = [0]
    for _ in range(radius):
        batch = np.stack([flats[i] for i in frontier])
        new_frontier = []
        products = [multipliers[t].apply(batch) for t in range(4)]
        for pos, src in enumerate(frontier):
            for t in range(4):
                cand = products[t][pos]
                key = flat_key(cand)
                if key not in seen:
                    seen[key] = len(flats)
                    new_frontier.append(len(flats))
                    flats.append(cand)
                    parents.append(src)
                    tokens.append(t)
        layer_sizes.append(len(new_frontier))
        if not new_frontier:
            break
        frontier = new_frontier
    return Ball(gens, radius, flats, parents, tokens, layer_sizes)


def export_ball_jsonl(ball: Ball, path: str) -> None:
    """One JSON object per element: index, word, and exact entries.

    Words use 'a'/'A'/'b'/'B' for A, A^-1, B, B^-1; entries are 9 lists
    of d decimal coefficient strings, row-major.
    """
    d = ball.gens.ctx.d
    with open(path, "w") as fh:
        for i in range(len(ball)):
            flat = ball.flat(i)
            entries = [
                [str(int(c)) for c in flat[row, l * d : (l + 1) * d]]
                for row in range(3)
                for l in range(3)
            ]
            rec = {"index": i, "word": word_str(ball.word(i)), "entries": entries}
            fh.write(json.dumps(rec) + "\n")
