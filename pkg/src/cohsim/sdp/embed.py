"""Real-symmetric embedding of Hermitian SDPs.

A Hermitian block ``X`` of dimension ``n`` maps to the real symmetric block

    E(X) = [[Re X, -Im X],
            [Im X,  Re X]]

of dimension ``2n``; ``X >= 0`` iff ``E(X) >= 0``.  A real functional
``Re tr(F X)`` becomes ``tr((E(F)/2) Y)`` on the embedded block.  Optimizing
over general symmetric ``Y >= 0`` instead of structured embeddings does not
change the optimum: averaging ``Y`` with ``J Y J^T`` for the symplectic
``J = [[0, -I], [I, 0]]`` restores the structure without moving any
constraint or objective value.
"""

from __future__ import annotations

import numpy as np

from ..linalg import hermitian_part
from .problem import Block, LinFunc, SdpProblem

__all__ = ["embed_complex", "embed_matrix", "extract_matrix"]


def embed_matrix(f: np.ndarray) -> np.ndarray:
    """E(F) for a complex matrix F (used for both variables and functionals)."""
    f = np.asarray(f, dtype=complex)
    re, im = f.real, f.imag
    return np.block([[re, -im], [im, re]])


def extract_matrix(y: np.ndarray) -> np.ndarray:
    """Recover the Hermitian matrix whose embedding best matches symmetric ``y``."""
    n = y.shape[0] // 2
    re = (y[:n, :n] + y[n:, n:]) / 2
    im = (y[n:, :n] - y[:n, n:]) / 2
    return hermitian_part(re + 1j * im)


def _embed_func(f: LinFunc, blocks: dict) -> LinFunc:
    mats = {}
    for lbl, m in f.mats.items():
        if blocks[lbl].complex:
            mats[lbl] = embed_matrix(m) / 2
        else:
            mats[lbl] = (m.real + m.real.T) / 2
    return LinFunc(mats, dict(f.scal))


def embed_complex(p: SdpProblem) -> SdpProblem:
    """Return an equivalent problem whose blocks are all real symmetric."""
    q = SdpProblem()
    for b in p.blocks.values():
        dim = 2 * b.dim if b.complex else b.dim
        q.blocks[b.label] = Block(b.label, dim, complex=False)
    q.scalars = list(p.scalars)
    q.sense = p.sense
    q.objective = _embed_func(p.objective, p.blocks)
    q.obj_offset = p.obj_offset
    q.equalities = [(_embed_func(f, p.blocks), t) for f, t in p.equalities]
    q.inequalities = [(_embed_func(f, p.blocks), r, t) for f, r, t in p.inequalities]
    q._slack_count = p._slack_count
    return q
