"""Shared fixtures-in-spirit for the test suite: random state factories
and the acceptance-line recorder."""

from __future__ import annotations

import numpy as np

# one "criterion: PASS/FAIL" line per acceptance check, printed by the
# terminal-summary hook in conftest.py
ACCEPTANCE_LINES: list[str] = []


def log_criterion(name: str, ok: bool) -> None:
    ACCEPTANCE_LINES.append(f"{name}: {'PASS' if ok else 'FAIL'}")


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None):
    """Random full(ish)-rank density matrix: Haar eigenbasis, flat Dirichlet
    eigenvalues."""
    if rank is None:
        rank = dim
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    evals = rng.dirichlet(np.ones(rank))
    mat = (q[:, :rank] * evals) @ q[:, :rank].conj().T
    return 0.5 * (mat + mat.conj().T)


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
