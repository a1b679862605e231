"""Core linear-algebra and state/channel primitives.

Everything downstream builds on this module: seeded random number
streams, Haar-random unitaries, tensor manipulation, validated state
containers, channel representations (Kraus / Choi / Stinespring), and
matrix (de)serialization in both JSON and a compact binary framing.

Conventions
-----------
* All matrices are dense ``numpy`` arrays with ``complex128`` entries.
* Choi matrices live on ``out (x) in`` with row-major ``vec``.
* Binary payloads are little-endian.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, ParseError, ValidationError

__all__ = [
    "RngSeed",
    "as_generator",
    "haar_unitary",
    "random_isometry",
    "tensor",
    "partial_trace",
    "hermitian_eig",
    "herm_part",
    "psd_clip",
    "PureState",
    "DensityOperator",
    "Subspace",
    "ChannelRep",
    "kraus_ops",
    "channel_apply",
    "channel_convert",
    "identity_channel",
    "matrix_to_json",
    "matrix_from_json",
    "matrix_to_bytes",
    "matrix_from_bytes",
    "canonical_dumps",
]

# ---------------------------------------------------------------------------
# randomness


@dataclass(frozen=True)
class RngSeed:
    """Counter-based seed: one master integer plus a stream index.

    Two RngSeed values with the same ``seed`` but different ``stream``
    yield statistically independent Philox streams, so parallel workers
    can draw without coordination and results stay reproducible under
    any scheduling order.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2**64, self.stream % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> "RngSeed":
        """Same master seed, different stream index."""
        return RngSeed(self.seed, stream)


def as_generator(source: "RngSeed | np.random.Generator | int") -> np.random.Generator:
    """Normalize any accepted randomness source to a ``Generator``."""
    if isinstance(source, np.random.Generator):
        return source
    if isinstance(source, RngSeed):
        return source.generator()
    if isinstance(source, (int, np.integer)) and not isinstance(source, bool):
        return RngSeed(int(source)).generator()
    raise InvalidInputError(
        f"cannot interpret {type(source).__name__!r} as a random generator"
    )


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Draw a ``dim x dim`` unitary from the Haar measure.

    Ginibre matrix -> QR, then the R-diagonal phases are pushed into Q
    to remove the sign ambiguity of the factorization; the result is
    exactly Haar distributed rather than merely "random looking".
    """
    if dim < 1:
        raise InvalidInputError(f"unitary dimension must be positive, got {dim}")
    g = as_generator(rng)
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_isometry(dim_in: int, dim_out: int, rng) -> np.ndarray:
    """Haar-random isometry ``dim_out x dim_in`` (columns orthonormal)."""
    if dim_in > dim_out:
        raise InvalidInputError(
            f"isometry needs dim_in <= dim_out, got {dim_in} > {dim_out}"
        )
    return haar_unitary(dim_out, rng)[:, :dim_in]


# ---------------------------------------------------------------------------
# tensor algebra


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators, left to right."""
    if not ops:
        raise InvalidInputError("tensor() needs at least one operator")
    return reduce(np.kron, ops)


def partial_trace(mat: np.ndarray, dims: Sequence[int], axis: int) -> np.ndarray:
    """Trace out factor ``axis`` of an operator on ``tensor(dims)``.

    ``dims`` lists the local dimensions in tensor order; the returned
    operator acts on the remaining factors in their original order.
    """
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise InvalidInputError(f"dimensions must be positive, got {dims}")
    n = len(dims)
    if not 0 <= axis < n:
        raise InvalidInputError(f"axis {axis} out of range for {n} factors")
    total = math.prod(dims)
    mat = np.asarray(mat)
    if mat.shape != (total, total):
        raise InvalidInputError(
            f"operator shape {mat.shape} does not match prod(dims)={total}"
        )
    t = mat.reshape(dims + dims)
    out = np.trace(t, axis1=axis, axis2=axis + n)
    keep = total // dims[axis]
    return out.reshape(keep, keep)


def herm_part(mat: np.ndarray) -> np.ndarray:
    """Hermitian part ``(M + M†)/2``."""
    return (mat + mat.conj().T) / 2.0


def hermitian_eig(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a (numerically) Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ascending and eigenvectors in
    the columns of ``v``.  Raises ``ValidationError`` if the input is
    not Hermitian to within 1e-8, or if the reconstruction
    ``v @ diag(w) @ v†`` misses the input by more than a 1e-10 relative
    error — the latter guards against silently garbage decompositions
    of ill-conditioned inputs.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {mat.shape}")
    skew = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if skew > 1e-8:
        raise ValidationError(f"matrix is not Hermitian: max |M - M†| = {skew:.3e}")
    h = herm_part(mat)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.linalg.norm(mat)))
    resid = float(np.linalg.norm((v * w) @ v.conj().T - mat))
    if resid > 1e-10 * scale:
        raise ValidationError(
            f"eigendecomposition reconstruction error {resid:.3e} exceeds tolerance"
        )
    return w, v


def psd_clip(mat: np.ndarray) -> np.ndarray:
    """Nearest positive-semidefinite matrix: clip negative eigenvalues."""
    w, v = np.linalg.eigh(herm_part(np.asarray(mat, dtype=complex)))
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


# ---------------------------------------------------------------------------
# state containers


@dataclass(frozen=True)
class PureState:
    """Unit vector in C^dim (norm enforced to 1e-12)."""

    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=complex).reshape(-1)
        object.__setattr__(self, "vec", v)
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > 1e-12:
            raise ValidationError(f"pure state norm {nrm!r} deviates from 1 by > 1e-12")

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.vec, self.vec.conj()))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.vec, other.vec))


@dataclass(frozen=True)
class DensityOperator:
    """Positive-semidefinite operator with trace in [0, 1].

    Sub-normalized operators (trace < 1) are allowed; ``normalized``
    reports whether the trace is 1 to within 1e-10.  Validation is
    numerical: Hermiticity to 1e-10, eigenvalues >= -1e-10, trace at
    most 1 + 1e-10.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density operator must be square, got {m.shape}")
        object.__setattr__(self, "mat", m)
        skew = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if skew > 1e-10:
            raise ValidationError(f"density operator not Hermitian: {skew:.3e}")
        w = np.linalg.eigvalsh(herm_part(m))
        if w.size and float(w[0]) < -1e-10:
            raise ValidationError(f"density operator has eigenvalue {w[0]:.3e} < -1e-10")
        tr = float(np.real(np.trace(m)))
        if tr > 1.0 + 1e-10 or tr < -1e-10:
            raise ValidationError(f"density operator trace {tr!r} outside [0, 1]")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    @property
    def normalized(self) -> bool:
        return abs(self.trace - 1.0) <= 1e-10

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(herm_part(self.mat))


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^dim given by an orthonormal column basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ValidationError(f"basis must be a 2-d array, got ndim={b.ndim}")
        object.__setattr__(self, "basis", b)
        gram = b.conj().T @ b
        if not np.allclose(gram, np.eye(b.shape[1]), atol=1e-10):
            raise ValidationError("subspace basis columns are not orthonormal")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


# ---------------------------------------------------------------------------
# channels

_CHANNEL_KINDS = ("kraus", "choi", "stinespring")


@dataclass(frozen=True)
class ChannelRep:
    """One completely positive trace-preserving map, in one of three forms.

    kind = "kraus":       data is a tuple of (dim_out x dim_in) operators
    kind = "choi":        data is the Choi matrix on out (x) in
    kind = "stinespring": data is an isometry (dim_out * dim_env) x dim_in

    Trace preservation and (for Choi) complete positivity are checked to
    1e-9 at construction.
    """

    kind: str
    data: tuple[np.ndarray, ...] | np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        if self.kind not in _CHANNEL_KINDS:
            raise InvalidInputError(f"unknown channel kind {self.kind!r}")
        if self.dim_in < 1 or self.dim_out < 1:
            raise InvalidInputError("channel dimensions must be positive")
        if self.kind == "kraus":
            ops = tuple(np.asarray(k, dtype=complex) for k in self.data)
            if not ops:
                raise InvalidInputError("kraus form needs at least one operator")
            for k in ops:
                if k.shape != (self.dim_out, self.dim_in):
                    raise ValidationError(
                        f"kraus operator shape {k.shape} != ({self.dim_out}, {self.dim_in})"
                    )
            object.__setattr__(self, "data", ops)
            acc = sum(k.conj().T @ k for k in ops)
            if not np.allclose(acc, np.eye(self.dim_in), atol=1e-9):
                raise ValidationError("kraus operators do not sum to identity (not TP)")
        elif self.kind == "choi":
            j = np.asarray(self.data, dtype=complex)
            d = self.dim_out * self.dim_in
            if j.shape != (d, d):
                raise ValidationError(f"choi matrix shape {j.shape} != ({d}, {d})")
            object.__setattr__(self, "data", j)
            if np.max(np.abs(j - j.conj().T)) > 1e-9:
                raise ValidationError("choi matrix is not Hermitian")
            w = np.linalg.eigvalsh(herm_part(j))
            if float(w[0]) < -1e-9:
                raise ValidationError(f"choi matrix eigenvalue {w[0]:.3e} < -1e-9 (not CP)")
            marginal = partial_trace(j, (self.dim_out, self.dim_in), 0)
            if not np.allclose(marginal, np.eye(self.dim_in), atol=1e-9):
                raise ValidationError("choi marginal on input is not identity (not TP)")
        else:  # stinespring
            v = np.asarray(self.data, dtype=complex)
            if v.ndim != 2 or v.shape[1] != self.dim_in or v.shape[0] % self.dim_out:
                raise ValidationError(
                    f"stinespring shape {v.shape} incompatible with "
                    f"in={self.dim_in}, out={self.dim_out}"
                )
            object.__setattr__(self, "data", v)
            if not np.allclose(v.conj().T @ v, np.eye(self.dim_in), atol=1e-9):
                raise ValidationError("stinespring operator is not an isometry")

    @property
    def dim_env(self) -> int:
        if self.kind == "kraus":
            return len(self.data)
        if self.kind == "stinespring":
            return self.data.shape[0] // self.dim_out
        return self.dim_out * self.dim_in  # generic upper bound for choi


def kraus_ops(channel: ChannelRep) -> tuple[np.ndarray, ...]:
    """Kraus operators of ``channel`` (the conversion hub).

    Choi form is eigendecomposed; eigenvalues below a relative 1e-12
    cutoff are dropped, so the returned family can be shorter than the
    ambient bound.
    """
    if channel.kind == "kraus":
        return channel.data
    if channel.kind == "stinespring":
        v = channel.data
        env = channel.dim_env
        cube = v.reshape(channel.dim_out, env, channel.dim_in)
        return tuple(cube[:, a, :].copy() for a in range(env))
    # choi
    w, u = hermitian_eig(channel.data)
    cutoff = 1e-12 * max(1.0, float(w[-1])) if w.size else 0.0
    ops = []
    for lam, col in zip(w, u.T):
        if lam > cutoff:
            ops.append(math.sqrt(float(lam)) * col.reshape(channel.dim_out, channel.dim_in))
    if not ops:
        raise ValidationError("choi matrix has no spectral weight above cutoff")
    return tuple(ops)


def channel_apply(channel: ChannelRep, rho: np.ndarray) -> np.ndarray:
    """Apply the channel to a (dim_in x dim_in) operator."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim_in, channel.dim_in):
        raise InvalidInputError(
            f"operator shape {rho.shape} != ({channel.dim_in}, {channel.dim_in})"
        )
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for k in kraus_ops(channel):
        out += k @ rho @ k.conj().T
    return out


def channel_convert(channel: ChannelRep, kind: str) -> ChannelRep:
    """Re-express ``channel`` in another representation."""
    if kind not in _CHANNEL_KINDS:
        raise InvalidInputError(f"unknown channel kind {kind!r}")
    if kind == channel.kind:
        return channel
    ops = kraus_ops(channel)
    if kind == "kraus":
        return ChannelRep("kraus", ops, channel.dim_in, channel.dim_out)
    if kind == "choi":
        d = channel.dim_out * channel.dim_in
        j = np.zeros((d, d), dtype=complex)
        for k in ops:
            v = k.reshape(-1)  # row-major vec -> out (x) in ordering
            j += np.outer(v, v.conj())
        return ChannelRep("choi", j, channel.dim_in, channel.dim_out)
    # stinespring: stack kraus operators along a fresh environment index
    env = len(ops)
    v = np.zeros((channel.dim_out * env, channel.dim_in), dtype=complex)
    for a, k in enumerate(ops):
        block = v.reshape(channel.dim_out, env, channel.dim_in)
        block[:, a, :] = k
    return ChannelRep("stinespring", v, channel.dim_in, channel.dim_out)


def identity_channel(dim: int) -> ChannelRep:
    return ChannelRep("kraus", (np.eye(dim, dtype=complex),), dim, dim)


# ---------------------------------------------------------------------------
# serialization


def matrix_to_json(mat: np.ndarray) -> dict:
    """JSON-ready dict with row-major real/imag float lists."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a 2-d array, got ndim={m.ndim}")
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in m.real.reshape(-1)],
        "im": [float(x) for x in m.imag.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError(f"matrix payload must be an object, got {type(obj).__name__}")
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re, im = obj["re"], obj["im"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix payload: {exc}") from exc
    if rows < 0 or cols < 0:
        raise ParseError(f"negative matrix shape ({rows}, {cols})")
    if len(re) != rows * cols or len(im) != rows * cols:
        raise ParseError(
            f"matrix payload length mismatch: {len(re)}/{len(im)} entries "
            f"for shape ({rows}, {cols})"
        )
    try:
        rearr = np.asarray(re, dtype=float).reshape(rows, cols)
        imarr = np.asarray(im, dtype=float).reshape(rows, cols)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric matrix entries: {exc}") from exc
    return rearr + 1j * imarr


_MAT_HEADER = struct.Struct("<QQ")


def matrix_to_bytes(mat: np.ndarray) -> bytes:
    """Compact framing: u64 rows, u64 cols, then interleaved re/im f8."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a 2-d array, got ndim={m.ndim}")
    body = np.empty(m.shape + (2,), dtype="<f8")
    body[..., 0] = m.real
    body[..., 1] = m.imag
    return _MAT_HEADER.pack(m.shape[0], m.shape[1]) + body.tobytes()


def matrix_from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < _MAT_HEADER.size:
        raise ParseError(f"matrix frame truncated: {len(buf)} bytes < header")
    rows, cols = _MAT_HEADER.unpack_from(buf)
    expect = _MAT_HEADER.size + rows * cols * 16
    if len(buf) != expect:
        raise ParseError(
            f"matrix frame length {len(buf)} != {expect} for shape ({rows}, {cols})"
        )
    body = np.frombuffer(buf, dtype="<f8", offset=_MAT_HEADER.size)
    body = body.reshape(rows, cols, 2)
    return body[..., 0] + 1j * body[..., 1]


def canonical_dumps(obj, precision: int = 12) -> str:
    """Deterministic JSON text: sorted keys, fixed float formatting.

    Floats are rendered with ``%.{precision}g``; pass ``precision=17``
    when the payload must round-trip float64 exactly.  Non-finite floats
    have no JSON literal, so they are emitted as the strings "inf",
    "-inf", and "nan".
    """
    pieces: list[str] = []
    _emit(obj, precision, pieces)
    return "".join(pieces)


def _emit(obj, precision: int, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):  # must precede the int check
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(repr(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            out.append('"nan"')
        elif math.isinf(v):
            out.append('"inf"' if v > 0 else '"-inf"')
        else:
            out.append(format(v, f".{precision}g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        keys = list(obj.keys())
        if any(not isinstance(k, str) for k in keys):
            raise InvalidInputError("canonical JSON requires string keys")
        out.append("{")
        for i, k in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(k))
            out.append(":")
            _emit(obj[k], precision, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, precision, out)
        out.append("]")
    else:
        raise InvalidInputError(
            f"cannot canonically serialize {type(obj).__name__}"
        )
