"""Seeded random states and channels for property tests and sampled bounds."""

from __future__ import annotations

import numpy as np

from . import linalg as la
from .channels import Channel, from_kraus, is_mio

__all__ = [
    "haar_state",
    "random_density",
    "random_channel",
    "random_incoherent_channel",
]


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_channel(dim_in: int, dim_out: int, rng: np.random.Generator,
                   n_kraus: int | None = None) -> Channel:
    """Random CPTP map from a Stinespring-style random isometry."""
    n_kraus = dim_in * dim_out if n_kraus is None else n_kraus
    g = rng.normal(size=(n_kraus * dim_out, dim_in)) + 1j * rng.normal(size=(n_kraus * dim_out, dim_in))
    q, _ = np.linalg.qr(g)
    kraus = [q[k * dim_out:(k + 1) * dim_out, :] for k in range(n_kraus)]
    return from_kraus(kraus, dim_in, dim_out)


def _permutation_phase_kraus(dim: int, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(dim)
    phases = np.exp(2j * np.pi * rng.random(dim))
    m = np.zeros((dim, dim), dtype=complex)
    m[perm, np.arange(dim)] = phases
    return m


def _classical_kraus(dim: int, rng: np.random.Generator) -> list:
    """Measure-dephase-reprepare with a random column-stochastic matrix."""
    t = rng.random(size=(dim, dim)) + 0.05
    t /= t.sum(axis=0, keepdims=True)
    ops = []
    for row in range(dim):
        for col in range(dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[row, col] = np.sqrt(t[row, col])
            ops.append(m)
    return ops


def random_incoherent_channel(dim: int, rng: np.random.Generator, n_parts: int = 3) -> Channel:
    """Random MIO as a mixture of incoherent-Kraus building blocks.

    Mixes permutation-phase unitaries and classical stochastic maps; every
    Kraus operator has at most one nonzero entry per column, so each block is
    an incoherent operation and so is the mixture.  Verified by rejection on
    the MIO functionals (the check should never actually reject).
    """
    for _ in range(20):
        weights = rng.dirichlet(np.ones(n_parts))
        kraus = []
        for w in weights:
            if rng.random() < 0.5:
                kraus.append(np.sqrt(w) * _permutation_phase_kraus(dim, rng))
            else:
                kraus.extend(np.sqrt(w) * m for m in _classical_kraus(dim, rng))
        n = from_kraus(kraus, dim, dim)
        if is_mio(n, tol=1e-9).ok:
            return n
    raise RuntimeError("failed to sample an incoherent channel")
