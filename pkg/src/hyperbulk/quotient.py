"""Finite quotients of the rotation triangle group.

Reducing the exact matrix entries modulo s^k (coefficient-wise, onto
[0, s^k)) maps the infinite rotation group onto a finite matrix group
G_k over Z_{s^k}[xi].  The family k = 1, 2, ... forms a coherent tower
of quotients whose regular representations converge spectrally to the
infinite lattice.

The group is enumerated breadth-first with batched integer matmuls; the
result records, per generator, the permutation it induces by right
multiplication, plus an inverse table, which is all the operator layer
needs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ResourceLimitError
from .ring import make_context
from .triangle import (
    GEN_A,
    GEN_B,
    TessellationParams,
    build_generators,
    inverse_token,
    matrix_to_flat,
    ring_index,
)

__all__ = ["QuotientGroup", "build_quotient", "quotient_project", "element_order"]

DEFAULT_ELEMENT_CAP = 500_000


def _storage_dtype(m: int):
    if m <= 256:
        return np.uint8
    if m <= 65536:
        return np.uint16
    return np.int64


def _mod_tables(ctx, flats, m: int):
    """Right-multiplication tables mod m for a list of flat exact matrices.

    Table K[(l, r), (j, s)] = sum_t flat[l][j]_t * (xi^(r+t))_s mod m.
    """
    d = ctx.d
    powers = np.array([ctx.power(e) for e in range(2 * d - 1)], dtype=object)
    powers = (powers.astype(object) % m).astype(np.int64)  # (2d-1, d)
    tables = []
    for flat in flats:
        K = np.zeros((3 * d, 3 * d), dtype=np.int64)
        for l in range(3):
            for j in range(3):
                entry = [int(flat[l, j * d + t]) % m for t in range(d)]
                for r in range(d):
                    acc = np.zeros(d, dtype=np.int64)
                    for t, g_t in enumerate(entry):
                        if g_t:
                            acc += g_t * powers[r + t]
                    K[l * d + r, j * d : (j + 1) * d] = acc % m
        tables.append(K)
    return tables


@dataclass
class QuotientGroup:
    """Finite quotient with generator-action permutations.

    gen_perm[t][i] is the index of (element i) * (generator t), with t
    running over A, A^-1, B, B^-1; inv[i] indexes the group inverse.
    elements[i] holds the canonical mod-s^k coefficients, shape (3, 3d).
    """

    p: int
    q: int
    s: int
    k: int
    order: int
    elements: np.ndarray
    gen_perm: np.ndarray          # (4, order) int64
    inv: np.ndarray               # (order,) int64
    left_perm: np.ndarray         # (4, order) int64, g_t * x actions
    parents: np.ndarray           # discovery tree parent indices
    tokens: np.ndarray            # discovery tree generator tokens
    torsion: dict = field(default_factory=dict)

    @property
    def params(self) -> TessellationParams:
        return TessellationParams(self.p, self.q)

    @property
    def modulus(self) -> int:
        return self.s**self.k

    @property
    def torsion_preserved(self) -> bool:
        return all(v["order"] == v["expected"] for v in self.torsion.values())

    def word(self, i: int) -> tuple:
        out = []
        while i > 0:
            out.append(int(self.tokens[i]))
            i = int(self.parents[i])
        return tuple(reversed(out))

    def apply_word(self, i: int, word) -> int:
        """Index of (element i) * (product of the word's generators)."""
        for t in word:
            i = int(self.gen_perm[t][i])
        return i

    def project(self, word) -> int:
        """Image of a free word under the quotient map, as an index."""
        return self.apply_word(0, word)

    def element_order(self, i: int) -> int:
        if i == 0:
            return 1
        word = self.word(i)
        j = i
        order = 1
        while j != 0:
            j = self.apply_word(j, word)
            order += 1
            if order > self.order:
                raise RuntimeError("order exceeded group size; table corrupt")
        return order

    def key(self, i: int) -> bytes:
        return self.elements[i].tobytes()

    def reduce_to(self, other: "QuotientGroup") -> np.ndarray:
        """Index map of the natural surjection onto a coarser quotient.

        other must be the same (p, q, s) at smaller k.
        """
        if (other.p, other.q, other.s) != (self.p, self.q, self.s) or other.k > self.k:
            raise ConfigError("target is not a coarser quotient of the same family")
        m = other.modulus
        reduced = (self.elements.astype(np.int64) % m).astype(other.elements.dtype)
        lookup = {other.key(i): i for i in range(other.order)}
        out = np.empty(self.order, dtype=np.int64)
        for i in range(self.order):
            out[i] = lookup[reduced[i].tobytes()]
        return out

    def save(self, path: str) -> None:
        header = json.dumps(
            {
                "p": self.p,
                "q": self.q,
                "s": self.s,
                "k": self.k,
                "order": self.order,
                "torsion": self.torsion,
            }
        )
        np.savez_compressed(
            path,
            header=np.frombuffer(header.encode(), dtype=np.uint8),
            elements=self.elements,
            gen_perm=self.gen_perm,
            inv=self.inv,
            left_perm=self.left_perm,
            parents=self.parents,
            tokens=self.tokens,
        )

    @classmethod
    def load(cls, path: str) -> "QuotientGroup":
        data = np.load(path)
        header = json.loads(bytes(data["header"]).decode())
        torsion = {k: v for k, v in header["torsion"].items()}
        return cls(
            p=header["p"],
            q=header["q"],
            s=header["s"],
            k=header["k"],
            order=header["order"],
            elements=data["elements"],
            gen_perm=data["gen_perm"],
            inv=data["inv"],
            left_perm=data["left_perm"],
            parents=data["parents"],
            tokens=data["tokens"],
            torsion=torsion,
        )


def build_quotient(
    p: int,
    q: int,
    s: int,
    k: int = 1,
    element_cap: int = DEFAULT_ELEMENT_CAP,
) -> QuotientGroup:
    """Enumerate the mod-s^k quotient of the {p, q} rotation group."""
    TessellationParams(p, q)
    if s < 2:
        raise ConfigError("modulus base s must be at least 2")
    if k < 1:
        raise ConfigError("level k must be at least 1")
    m = s**k
    gens = build_generators(p, q)
    ctx = gens.ctx
    d = ctx.d
    width = 3 * d
    dtype = _storage_dtype(m)

    gen_flats = [matrix_to_flat(gens.token_matrix(t)) for t in range(4)]
    K_right = _mod_tables(ctx, gen_flats, m)
    # left multiplication by g equals transposed right multiplication by g^T
    K_left = _mod_tables(ctx, [_transpose_flat(f, d) for f in gen_flats], m)

    ident = np.zeros((3, width), dtype=dtype)
    for i in range(3):
        ident[i, i * d] = 1

    elements = [ident]
    parents = [-1]
    tokens = [-1]
    seen = {ident.tobytes(): 0}
    frontier = [0]
    while frontier:
        batch = np.stack([elements[i] for i in frontier]).astype(np.int64)
        n = len(frontier)
        flat = batch.reshape(n * 3, width)
        prods = [((flat @ K) % m).reshape(n, 3, width).astype(dtype) for K in K_right]
        new_frontier = []
        for pos in range(n):
            src = frontier[pos]
            for t in range(4):
                cand = prods[t][pos]
                key = cand.tobytes()
                if key not in seen:
                    if len(elements) >= element_cap:
                        raise ResourceLimitError(
                            f"quotient of {{{p},{q}}} mod {s}^{k} exceeded the "
                            f"element cap {element_cap} (BFS had {len(elements)} "
                            f"elements with an unfinished frontier); raise "
                            f"element_cap to continue"
                        )
                    seen[key] = len(elements)
                    new_frontier.append(len(elements))
                    elements.append(cand)
                    parents.append(src)
                    tokens.append(t)
        frontier = new_frontier

    order = len(elements)
    element_arr = np.stack(elements)
    parents = np.array(parents, dtype=np.int64)
    tokens = np.array(tokens, dtype=np.int64)

    gen_perm = _permutations(element_arr, K_right, seen, m, transpose=False)
    left_perm = _permutations(element_arr, K_left, seen, m, transpose=True)

    # inverse table: (parent * g_t)^-1 = g_t^-1 * parent^-1, walkable in
    # BFS order via the left-action permutations
    inv = np.zeros(order, dtype=np.int64)
    for i in range(1, order):
        inv[i] = left_perm[inverse_token(int(tokens[i]))][inv[parents[i]]]

    group = QuotientGroup(
        p=p, q=q, s=s, k=k, order=order,
        elements=element_arr, gen_perm=gen_perm, inv=inv, left_perm=left_perm,
        parents=parents, tokens=tokens,
    )

    # torsion audit: the generators should keep their infinite-group orders
    idx_a = group.project((GEN_A,))
    idx_b = group.project((GEN_B,))
    idx_ab = group.project((GEN_A, GEN_B))
    group.torsion = {
        "A": {"expected": p, "order": group.element_order(idx_a)},
        "B": {"expected": q, "order": group.element_order(idx_b)},
        "AB": {"expected": 2, "order": group.element_order(idx_ab)},
    }
    return group


def _transpose_flat(flat: np.ndarray, d: int) -> np.ndarray:
    out = flat.copy()
    for i in range(3):
        for j in range(3):
            out[i, j * d : (j + 1) * d] = flat[j, i * d : (i + 1) * d]
    return out


def _permutations(elements, tables, seen, m, transpose, chunk=8192):
    order, _, width = elements.shape
    d = width // 3
    out = np.zeros((4, order), dtype=np.int64)
    for start in range(0, order, chunk):
        block = elements[start : start + chunk].astype(np.int64)
        if transpose:
            block = block.reshape(-1, 3, 3, d).swapaxes(1, 2).reshape(-1, 3, width)
        n = block.shape[0]
        flat = block.reshape(n * 3, width)
        for t, K in enumerate(tables):
            prod = ((flat @ K) % m).reshape(n, 3, width)
            if transpose:
                prod = prod.reshape(-1, 3, 3, d).swapaxes(1, 2).reshape(-1, 3, width)
            prod = prod.astype(elements.dtype)
            for pos in range(n):
                out[t, start + pos] = seen[prod[pos].tobytes()]
    return out


def quotient_project(word, group: QuotientGroup) -> int:
    return group.project(word)


def element_order(i: int, group: QuotientGroup) -> int:
    return group.element_order(i)
