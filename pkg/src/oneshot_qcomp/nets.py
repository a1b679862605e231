"""Finite point sets that approximate the complex unit sphere, and the
subspace semi-norm they are used to control.

Construction is randomized greedy packing: Haar points are kept only if
they sit at distance > epsilon from everything kept so far.  A maximal
epsilon-packing is automatically an epsilon-covering, and its size can
never exceed (1 + 2/eps)^(2 dim) <= (4/eps)^(2 dim), so the advertised
cardinality bound holds by construction.  Covering quality is verified
empirically by ``check_covering`` — at the only scales where any of
this is computable, Monte Carlo probing is the test that matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InfeasibleScaleError, InvalidInputError, ValidationError
from .qcore import PureState, Subspace, as_generator, herm_part

__all__ = [
    "SphereNet",
    "sphere_net_size_bound",
    "sphere_net",
    "check_covering",
    "seminorm",
    "SubspaceNet",
    "subspace_net_size_bound",
    "subspace_net_build",
    "snap_to_net",
]


@dataclass(frozen=True)
class SphereNet:
    """Point set on the unit sphere of C^dim with target radius epsilon.

    The container itself does not police the cardinality bound — tests
    and builders do — so externally supplied point sets (e.g. plain Haar
    clouds) can be wrapped and probed too.
    """

    dim: int
    epsilon: float
    points: tuple[PureState, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError(f"dimension must be positive, got {self.dim}")
        if not 0.0 < self.epsilon <= 1.0:
            raise InvalidInputError(f"radius must lie in (0, 1], got {self.epsilon}")
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        for i, p in enumerate(pts):
            if p.dim != self.dim:
                raise ValidationError(f"point {i} has dim {p.dim}, net has {self.dim}")

    def matrix(self) -> np.ndarray:
        """Points stacked as rows, (len(points), dim)."""
        if not self.points:
            return np.zeros((0, self.dim), dtype=complex)
        return np.stack([p.vec for p in self.points])


def sphere_net_size_bound(dim: int, epsilon: float) -> float:
    """Cardinality bound (4/eps)^(2 dim) for an eps-dense set."""
    return (4.0 / epsilon) ** (2 * dim)


def _haar_point(dim: int, g: np.random.Generator) -> np.ndarray:
    v = g.standard_normal(dim) + 1j * g.standard_normal(dim)
    return v / np.linalg.norm(v)


def sphere_net(dim: int, epsilon: float, rng, budget: int) -> SphereNet:
    """Greedy epsilon-net on the unit sphere of C^dim.

    Refuses upfront (rather than silently truncating) when the
    cardinality bound exceeds ``budget``.  Sampling stops once 1000
    consecutive candidates land within epsilon of the kept set, at which
    point the packing is maximal for all practical purposes.
    """
    if dim < 1:
        raise InvalidInputError(f"dimension must be positive, got {dim}")
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"radius must lie in (0, 1], got {epsilon}")
    bound = sphere_net_size_bound(dim, epsilon)
    if bound > budget:
        raise InfeasibleScaleError(
            f"net size bound {bound:.3g} exceeds budget {budget} "
            f"at dim={dim}, eps={epsilon}"
        )
    g = as_generator(rng)
    kept: list[np.ndarray] = []
    stack = np.zeros((0, dim), dtype=complex)
    rejects = 0
    while rejects < 1000:
        v = _haar_point(dim, g)
        if stack.shape[0]:
            dist = float(np.min(np.linalg.norm(stack - v, axis=1)))
        else:
            dist = math.inf
        if dist > epsilon:
            kept.append(v)
            stack = np.vstack([stack, v[None, :]])
            rejects = 0
        else:
            rejects += 1
    return SphereNet(dim=dim, epsilon=epsilon, points=tuple(PureState(v) for v in kept))


def check_covering(net: SphereNet, probes: int, rng) -> tuple[float, bool]:
    """Probe the covering property with random unit vectors.

    Returns the largest observed distance-to-net and whether every probe
    landed within the net's radius.  An empty net fails with an infinite
    gap.
    """
    if probes < 1:
        raise InvalidInputError(f"probe count must be >= 1, got {probes}")
    if not net.points:
        return math.inf, False
    g = as_generator(rng)
    stack = net.matrix()
    max_gap = 0.0
    for _ in range(probes):
        v = _haar_point(net.dim, g)
        gap = float(np.min(np.linalg.norm(stack - v, axis=1)))
        max_gap = max(max_gap, gap)
    return max_gap, max_gap <= net.epsilon


def seminorm(m: np.ndarray, a: Subspace) -> float:
    """max |<w| M |w>| over unit vectors w in the subspace.

    Equals the largest-magnitude eigenvalue of the compression F* M F of
    the (Hermitian) operator to the subspace frame.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got {m.shape}")
    if m.shape[0] != a.dim:
        raise InvalidInputError(
            f"operator dim {m.shape[0]} does not match subspace ambient dim {a.dim}"
        )
    if np.max(np.abs(m - m.conj().T)) > 1e-8:
        raise InvalidInputError("seminorm is defined for Hermitian operators")
    if a.rank == 0:
        return 0.0
    comp = a.basis.conj().T @ m @ a.basis
    w = np.linalg.eigvalsh(herm_part(comp))
    return float(np.max(np.abs(w)))


# ---------------------------------------------------------------------------
# subspace nets (toy scale)


@dataclass(frozen=True)
class SubspaceNet:
    """All spans of up to ``dim_bound`` base-net points, keyed for snapping."""

    ambient_dim: int
    dim_bound: int
    base: SphereNet
    members: tuple[Subspace, ...]
    member_keys: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.members) != len(self.member_keys):
            raise ValidationError("members and keys out of sync")
        for s in self.members:
            if s.rank > self.dim_bound:
                raise ValidationError(
                    f"member of rank {s.rank} exceeds bound {self.dim_bound}"
                )

    def lookup(self, key: tuple[int, ...]) -> Subspace:
        try:
            return self.members[self.member_keys.index(key)]
        except ValueError:
            raise InvalidInputError(f"no net member for base-point key {key}") from None


def subspace_net_size_bound(q: int, d: int, delta: float) -> float:
    """Cardinality bound (8 sqrt(d)/delta)^(2 q d) for a subspace net."""
    return (8.0 * math.sqrt(d) / delta) ** (2 * q * d)


_MEMBER_CAP = 200_000


def subspace_net_build(q: int, d: int, base: SphereNet) -> SubspaceNet:
    """Enumerate spans of 1..d base points (toy scales only).

    The member count is combinatorial in the base-net size, so the
    builder refuses anything past a few hundred thousand candidate
    subsets instead of grinding forever.
    """
    if d < 1 or d > q:
        raise InvalidInputError(f"need 1 <= d <= q, got d={d}, q={q}")
    if base.dim != q:
        raise InvalidInputError(f"base net dim {base.dim} != ambient dim {q}")
    npts = len(base.points)
    total = sum(math.comb(npts, r) for r in range(1, d + 1))
    if total > _MEMBER_CAP:
        raise InfeasibleScaleError(
            f"{total} candidate subsets exceed the {_MEMBER_CAP} cap "
            f"(base net has {npts} points, d={d})"
        )
    members: list[Subspace] = []
    keys: list[tuple[int, ...]] = []
    for r in range(1, d + 1):
        for idx in combinations(range(npts), r):
            cols = np.stack([base.points[i].vec for i in idx], axis=1)
            frame, rdiag = np.linalg.qr(cols)
            keep = np.abs(np.diagonal(rdiag)) > 1e-12
            members.append(Subspace(frame[:, keep]))
            keys.append(idx)
    return SubspaceNet(
        ambient_dim=q,
        dim_bound=d,
        base=base,
        members=tuple(members),
        member_keys=tuple(keys),
    )


def snap_to_net(net: SubspaceNet, a: Subspace) -> Subspace:
    """Replace a subspace by the net member spanned by the nearest base
    points to each of its frame columns (ties resolved to the lowest
    base index, so snapping is deterministic)."""
    if a.dim != net.ambient_dim:
        raise InvalidInputError(
            f"subspace ambient dim {a.dim} != net ambient dim {net.ambient_dim}"
        )
    if a.rank > net.dim_bound:
        raise InvalidInputError(
            f"subspace rank {a.rank} exceeds net dim bound {net.dim_bound}"
        )
    if a.rank == 0:
        raise InvalidInputError("cannot snap the zero subspace")
    stack = net.base.matrix()
    chosen: set[int] = set()
    for col in a.basis.T:
        dist = np.linalg.norm(stack - col, axis=1)
        chosen.add(int(np.argmin(dist)))  # argmin takes the lowest index on ties
    return net.lookup(tuple(sorted(chosen)))
