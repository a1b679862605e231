"""Random block ensembles: Haar bases cut into equal projector blocks.

An instance is ``groups`` Haar-random orthonormal bases of C^m, each
partitioned into ``k`` consecutive column blocks of size m/k.  State
(i, j) is the normalized projector onto block j of basis i, so each
state has flat spectrum {k/m} on an (m/k)-dimensional support, and the
uniform mixture over all n = groups * k states is exactly I/m.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .entropy import CqState, ImaxCertificate, mutual_info_cq
from .errors import InvalidInputError, ParseError, ValidationError
from .qcore import (
    DensityOperator,
    RngSeed,
    canonical_dumps,
    haar_unitary,
    matrix_from_bytes,
    matrix_from_json,
    matrix_to_bytes,
    matrix_to_json,
)

__all__ = [
    "EnsembleParams",
    "JrsEnsemble",
    "generate_jrs",
    "ensemble_average",
    "to_cq_state",
    "qic_prepare_send",
    "jrs_certificate",
    "save",
    "load",
]


@dataclass(frozen=True)
class EnsembleParams:
    """Shape of a block ensemble: dimension m, k blocks, `groups` bases."""

    m: int
    k: int
    groups: int
    seed: RngSeed

    def __post_init__(self):
        if isinstance(self.seed, (int, np.integer)):
            object.__setattr__(self, "seed", RngSeed(int(self.seed)))
        if self.m < 1 or self.k < 1 or self.groups < 1:
            raise InvalidInputError(
                f"m, k, groups must be positive, got {(self.m, self.k, self.groups)}"
            )
        if self.m % self.k:
            raise InvalidInputError(f"k={self.k} must divide m={self.m}")

    @property
    def n(self) -> int:
        return self.groups * self.k

    @property
    def block(self) -> int:
        return self.m // self.k


@dataclass(frozen=True)
class JrsEnsemble:
    """Materialized block ensemble: the bases, with states built on demand."""

    params: EnsembleParams
    bases: tuple[np.ndarray, ...]

    def __post_init__(self):
        bases = tuple(np.asarray(b, dtype=complex) for b in self.bases)
        object.__setattr__(self, "bases", bases)
        m = self.params.m
        if len(bases) != self.params.groups:
            raise ValidationError(
                f"{len(bases)} bases for groups={self.params.groups}"
            )
        eye = np.eye(m)
        for i, b in enumerate(bases):
            if b.shape != (m, m):
                raise ValidationError(f"basis {i} has shape {b.shape}, expected ({m}, {m})")
            if not np.allclose(b.conj().T @ b, eye, atol=1e-10):
                raise ValidationError(f"basis {i} is not unitary to 1e-10")

    def state(self, i: int, j: int) -> DensityOperator:
        """State (i, j): normalized projector onto block j of basis i."""
        p = self.params
        if not (0 <= i < p.groups and 0 <= j < p.k):
            raise InvalidInputError(
                f"index ({i}, {j}) out of range for groups={p.groups}, k={p.k}"
            )
        cols = self.bases[i][:, j * p.block : (j + 1) * p.block]
        return DensityOperator((p.k / p.m) * (cols @ cols.conj().T))

    def states(self) -> list[DensityOperator]:
        """All n states in (i, j) lexicographic order."""
        p = self.params
        return [self.state(i, j) for i in range(p.groups) for j in range(p.k)]

    def labels(self) -> list[tuple[int, int]]:
        p = self.params
        return [(i, j) for i in range(p.groups) for j in range(p.k)]


def generate_jrs(params: EnsembleParams) -> JrsEnsemble:
    """Draw the ensemble: basis i comes from stream i of the master seed.

    Per-basis streams make generation order-independent, so the same
    params produce the same ensemble whether bases are drawn serially or
    in parallel.
    """
    bases = tuple(
        haar_unitary(params.m, params.seed.child(i)) for i in range(params.groups)
    )
    return JrsEnsemble(params=params, bases=bases)


def ensemble_average(e: "JrsEnsemble | CqState") -> DensityOperator:
    """Probability-weighted mean state.

    For a block ensemble the mean must be exactly maximally mixed; that
    identity is asserted (to 1e-10) rather than assumed, since it is the
    anchor for several downstream closed forms.
    """
    if isinstance(e, CqState):
        return e.average()
    m = e.params.m
    acc = np.zeros((m, m), dtype=complex)
    for s in e.states():
        acc += s.mat
    acc /= e.params.n
    if not np.allclose(acc, np.eye(m) / m, atol=1e-10):
        raise ValidationError("ensemble average deviates from I/m beyond 1e-10")
    return DensityOperator(acc)


def to_cq_state(e: JrsEnsemble) -> CqState:
    """Uniform cq state over the n states, in label order."""
    n = e.params.n
    return CqState(probs=np.full(n, 1.0 / n), states=tuple(e.states()))


def qic_prepare_send(e: "JrsEnsemble | CqState") -> float:
    """Information cost (bits) of the protocol that just sends the state.

    Equals half the classical-quantum mutual information; for a block
    ensemble this is exactly (1/2) log2 k.
    """
    tau = e if isinstance(e, CqState) else to_cq_state(e)
    return 0.5 * mutual_info_cq(tau)


def jrs_certificate(e: JrsEnsemble) -> ImaxCertificate:
    """Closed-form optimal certificate pair for the max-information program.

    Primal: sigma' = (k/m) I dominates every state (their top eigenvalue
    is exactly k/m), with trace k.  Dual: Y_ij = (k/n) * (support
    projector of state ij); per basis the blocks tile the identity, so
    the family sums to exactly I and its value is k.  Gap: 0.
    """
    p = e.params
    sigma = (p.k / p.m) * np.eye(p.m, dtype=complex)
    scale = p.k / p.n
    duals = []
    for i in range(p.groups):
        for j in range(p.k):
            support = (p.m / p.k) * e.state(i, j).mat  # flat spectrum -> projector
            duals.append(scale * support)
    return ImaxCertificate(
        value=math.log2(p.k), primal_sigma=sigma, dual_ops=tuple(duals), gap=0.0
    )


# ---------------------------------------------------------------------------
# serialization

_BIN_HEADER = struct.Struct("<QQQQ")  # m, k, groups, seed


def _to_json_obj(e: JrsEnsemble) -> dict:
    return {
        "m": e.params.m,
        "k": e.params.k,
        "groups": e.params.groups,
        "seed": e.params.seed.seed,
        "bases": [matrix_to_json(b) for b in e.bases],
    }


def _from_json_obj(obj) -> JrsEnsemble:
    if not isinstance(obj, dict):
        raise ParseError(f"ensemble payload must be an object, got {type(obj).__name__}")
    missing = {"m", "k", "groups", "seed", "bases"} - set(obj)
    if missing:
        raise ParseError(f"ensemble payload missing keys {sorted(missing)}")
    try:
        params = EnsembleParams(
            m=int(obj["m"]),
            k=int(obj["k"]),
            groups=int(obj["groups"]),
            seed=RngSeed(int(obj["seed"])),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed ensemble header: {exc}") from exc
    bases = tuple(matrix_from_json(b) for b in obj["bases"])
    return JrsEnsemble(params=params, bases=bases)


def save(e: JrsEnsemble, path, fmt: str | None = None) -> None:
    """Write the ensemble; format from ``fmt`` or the file extension.

    JSON is canonical (sorted keys, 17 significant digits so float64
    round-trips exactly); the binary container is bit-exact.
    """
    path = str(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "bin"
    if fmt == "json":
        text = canonical_dumps(_to_json_obj(e), precision=17)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    elif fmt == "bin":
        p = e.params
        blob = [_BIN_HEADER.pack(p.m, p.k, p.groups, p.seed.seed % 2**64)]
        for b in e.bases:
            blob.append(matrix_to_bytes(b))
        with open(path, "wb") as fh:
            fh.write(b"".join(blob))
    else:
        raise InvalidInputError(f"unknown ensemble format {fmt!r}")


def _load_binary(raw: bytes, path: str) -> JrsEnsemble:
    if len(raw) < _BIN_HEADER.size:
        raise ParseError(f"{path}: header truncated at {len(raw)} bytes")
    m, k, groups, seed = _BIN_HEADER.unpack_from(raw)
    try:
        params = EnsembleParams(m=m, k=k, groups=groups, seed=RngSeed(seed))
    except InvalidInputError as exc:
        raise ParseError(f"{path}: inconsistent header: {exc}") from exc
    frame = 16 + m * m * 16
    offset = _BIN_HEADER.size
    bases = []
    for i in range(groups):
        chunk = raw[offset : offset + frame]
        if len(chunk) != frame:
            raise ParseError(f"{path}: basis {i} truncated at byte {offset}")
        bases.append(matrix_from_bytes(chunk))
        offset += frame
    if offset != len(raw):
        raise ParseError(f"{path}: {len(raw) - offset} trailing bytes")
    return JrsEnsemble(params=params, bases=tuple(bases))


def load(path) -> JrsEnsemble:
    """Read an ensemble file, sniffing JSON vs binary from the content."""
    path = str(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:1] == b"{":
        # Looks like JSON.  (A binary file opens with the m field, whose
        # low byte equals '{' only for m = 123 mod 256 — and such a file
        # still fails UTF-8/JSON decoding and drops through to binary.)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return _load_binary(raw, path)
        return _from_json_obj(obj)
    return _load_binary(raw, path)
