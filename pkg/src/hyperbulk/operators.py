"""Group-algebra elements and their sparse matrix representations.

A tight-binding model on the {p, q} lattice is a finite formal sum
h = sum_g w_g |g> of group elements with complex weights, encoded here
by free words in the rotation generators.  Representing h on a finite
quotient G uses the right regular action

    (H psi)(g') = sum_g w_g psi(g' g^{-1})

so H commutes with all left translations; on a word-metric ball the
same action is truncated to pairs that stay inside the ball.

Cyclic-subgroup projections and the flat-band models built from them
follow the lattice conventions: x_1 = A, x_2 = B, x_3 = AB with
rotation orders nu = (p, q, 2).
"""

from __future__ import annotations

import cmath
import json

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import ConfigError
from .quotient import QuotientGroup
from .triangle import (
    GEN_A,
    GEN_A_INV,
    GEN_B,
    GEN_B_INV,
    Ball,
    RightMultiplier,
    inverse_token,
    inverse_word,
    parse_word,
    word_str,
    word_to_matrix,
)

__all__ = [
    "AlgebraElement",
    "adjacency",
    "cyclic_projection",
    "model_hamiltonian",
    "interpolate",
    "represent_periodic",
    "represent_open",
    "hermiticity_defect",
    "algebra_to_json",
    "algebra_from_json",
    "save_matrix_market",
]

_COEFF_EPS = 1e-15


class AlgebraElement:
    """Formal complex combination of free words in A, A^-1, B, B^-1.

    Terms with negligible coefficients are dropped; words are kept as
    written (no group-relation rewriting), so distinct words that happen
    to represent the same group element simply accumulate when the
    element is represented on a concrete group.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for w, c in dict(terms).items():
                c = complex(c)
                if abs(c) > _COEFF_EPS:
                    self.terms[tuple(w)] = c

    @classmethod
    def identity(cls, coeff=1.0) -> "AlgebraElement":
        return cls({(): coeff})

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0.0) + c
        return AlgebraElement(out)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement({w: scalar * c for w, c in self.terms.items()})

    __mul__ = __rmul__

    def dagger(self) -> "AlgebraElement":
        """Formal adjoint: each word is inverted and conjugated."""
        return AlgebraElement(
            {inverse_word(w): c.conjugate() for w, c in self.terms.items()}
        )

    def items(self):
        return self.terms.items()

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        body = ", ".join(
            f"'{word_str(w)}': {c:.6g}" for w, c in sorted(self.terms.items())
        )
        return f"AlgebraElement({{{body}}})"


def adjacency(p: int, q: int) -> AlgebraElement:
    """Nearest-neighbor hopping (x_1 + x_1^-1 + x_2 + x_2^-1) / 4.

    The weights do not depend on p, q; the signature mirrors the other
    model builders.
    """
    if p < 3 or q < 3:
        raise ConfigError("need p, q >= 3")
    quarter = 0.25
    return AlgebraElement(
        {
            (GEN_A,): quarter,
            (GEN_A_INV,): quarter,
            (GEN_B,): quarter,
            (GEN_B_INV,): quarter,
        }
    )


_CYCLIC_BASE = {1: (GEN_A,), 2: (GEN_B,), 3: (GEN_A, GEN_B)}


def cyclic_projection(alpha: int, kidx: int, p: int, q: int) -> AlgebraElement:
    """Spectral projection of the cyclic rotation x_alpha onto e^(2 pi i kidx / nu).

    p_alpha(lambda) = (1/nu) sum_j lambda^j x_alpha^j with nu the order
    of x_alpha, i.e. nu = p, q, 2 for alpha = 1, 2, 3.
    """
    if alpha not in (1, 2, 3):
        raise ConfigError(f"alpha must be 1, 2 or 3, got {alpha}")
    nu = {1: p, 2: q, 3: 2}[alpha]
    if not 1 <= kidx <= nu:
        raise ConfigError(f"kidx must lie in 1..{nu} for alpha={alpha}, got {kidx}")
    lam = cmath.exp(2j * cmath.pi * kidx / nu)
    base = _CYCLIC_BASE[alpha]
    terms = {}
    for j in range(nu):
        terms[base * j] = lam**j / nu
    return AlgebraElement(terms)


def model_hamiltonian(alpha: int, kidx: int, eps: float, p: int, q: int) -> AlgebraElement:
    """h_alpha(lambda, eps) = eps (1 - 2 p_alpha(lambda)) + (1 - eps) * adjacency.

    Gapped at E = 0 whenever eps > 1/2, with the lower band spanned by
    the projection's image.
    """
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"eps must lie in [0, 1], got {eps}")
    proj = cyclic_projection(alpha, kidx, p, q)
    return (
        AlgebraElement.identity(eps)
        + (-2.0 * eps) * proj
        + (1.0 - eps) * adjacency(p, q)
    )


def interpolate(models, weights) -> AlgebraElement:
    """Convex combination of algebra elements over simplex weights."""
    weights = [float(x) for x in weights]
    if len(weights) != len(models):
        raise ConfigError("weights and models must have equal length")
    if any(x < -1e-12 for x in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise ConfigError(f"weights must be a simplex point, got {weights}")
    out = AlgebraElement()
    for lam, h in zip(weights, models):
        out = out + lam * h
    return out


def _is_real(h: AlgebraElement) -> bool:
    return all(abs(c.imag) <= _COEFF_EPS for c in h.terms.values())


def represent_periodic(h: AlgebraElement, group: QuotientGroup) -> sp.csr_matrix:
    """Right-regular representation of h on a finite quotient.

    Entry (target, source) accumulates w_g where target is source acted
    on by g^-1 from the right.
    """
    n = group.order
    dtype = np.float64 if _is_real(h) else np.complex128
    cols = np.arange(n, dtype=np.int64)
    rows_all, cols_all, vals_all = [], [], []
    for w, c in h.items():
        idx = cols
        for t in reversed(w):
            # right multiplication by the inverse word, one token at a time
            idx = group.gen_perm[inverse_token(t)][idx]
        rows_all.append(idx)
        cols_all.append(cols)
        vals_all.append(np.full(n, c if dtype == np.complex128 else c.real, dtype=dtype))
    if not rows_all:
        return sp.csr_matrix((n, n), dtype=dtype)
    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(n, n),
    ).tocsr()
    mat.sum_duplicates()
    return mat


def represent_open(h: AlgebraElement, ball: Ball) -> sp.csr_matrix:
    """Hard-truncated representation of h on a word-metric ball.

    Matrix entries couple ball elements z, z' with z = z' g^-1; pairs
    whose endpoint falls outside the ball are dropped.  Because the
    model is Hermitian, surviving entries come in conjugate pairs, so
    the truncation preserves Hermiticity.
    """
    gens = ball.gens
    n = len(ball)
    dtype = np.float64 if _is_real(h) else np.complex128
    batch = ball.batch()
    rows_all, cols_all, vals_all = [], [], []
    for w, c in h.items():
        if not w:
            rows_all.append(np.arange(n, dtype=np.int64))
            cols_all.append(np.arange(n, dtype=np.int64))
            vals_all.append(np.full(n, c if dtype == np.complex128 else c.real, dtype=dtype))
            continue
        g_inv = word_to_matrix(inverse_word(w), gens)
        prod = RightMultiplier(g_inv).apply(batch)
        rows, cols = [], []
        for src in range(n):
            tgt = ball.lookup(prod[src])
            if tgt >= 0:
                rows.append(tgt)
                cols.append(src)
        rows_all.append(np.array(rows, dtype=np.int64))
        cols_all.append(np.array(cols, dtype=np.int64))
        vals_all.append(
            np.full(len(rows), c if dtype == np.complex128 else c.real, dtype=dtype)
        )
    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(n, n),
    ).tocsr()
    mat.sum_duplicates()
    return mat


def hermiticity_defect(mat: sp.spmatrix) -> float:
    diff = (mat - mat.getH()).tocoo()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def algebra_to_json(h: AlgebraElement) -> str:
    return json.dumps(
        {word_str(w): [c.real, c.imag] for w, c in sorted(h.items())}, indent=0
    )


def algebra_from_json(text: str) -> AlgebraElement:
    data = json.loads(text)
    return AlgebraElement({parse_word(k): complex(re, im) for k, (re, im) in data.items()})


def save_matrix_market(mat: sp.spmatrix, path: str, comment: str = "") -> None:
    scipy.io.mmwrite(path, mat, comment=comment)
