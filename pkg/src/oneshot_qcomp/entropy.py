"""Entropic quantities of classical-quantum ensembles, base-2 throughout.

The centerpiece is ``imax_cq``: the max-information of a cq state,
computed as the convex program

    minimize  Tr sigma'   subject to   sigma' >= rho_x  for all x

(value in bits is the log of the optimal trace).  Rather than trusting
any solver's status flag, the result carries explicit primal/dual
certificates that ``verify_imax_certificate`` re-checks with plain
dense linear algebra, so a third party can audit the number without
rerunning the optimizer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, InvalidInputError, ValidationError
from .qcore import (
    DensityOperator,
    herm_part,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    psd_clip,
    tensor,
)

__all__ = [
    "von_neumann",
    "min_entropy",
    "relative_entropy",
    "max_relative_entropy",
    "CqState",
    "mutual_info_cq",
    "ImaxCertificate",
    "imax_cq",
    "verify_imax_certificate",
    "SmoothingParams",
    "smooth_imax_lb",
    "cond_mi_product",
]

_LOG2 = math.log(2.0)
_SUPPORT_CUT = 1e-10  # relative eigenvalue threshold for support decisions


def _mat(x) -> np.ndarray:
    return x.mat if isinstance(x, DensityOperator) else np.asarray(x, dtype=complex)


def von_neumann(rho) -> float:
    """Entropy -sum lambda log2 lambda, with 0 log 0 = 0."""
    w = np.clip(np.linalg.eigvalsh(herm_part(_mat(rho))), 0.0, None)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w))) if w.size else 0.0


def min_entropy(rho) -> float:
    """-log2 of the operator norm."""
    w = np.linalg.eigvalsh(herm_part(_mat(rho)))
    top = float(w[-1])
    if top <= 0.0:
        raise InvalidInputError("min-entropy of the zero operator is undefined")
    return -math.log2(top)


def _support_split(sigma: np.ndarray):
    """Eigendecompose and split on the relative support cutoff."""
    w, v = np.linalg.eigh(herm_part(sigma))
    cut = _SUPPORT_CUT * max(float(w[-1]), 0.0)
    on = w > cut
    return w, v, on


def relative_entropy(rho, sigma) -> float:
    """Tr rho (log2 rho - log2 sigma); +inf outside sigma's support."""
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    ws, vs, on = _support_split(b)
    if not np.all(on):
        perp = vs[:, ~on]
        leak = float(np.real(np.trace(perp.conj().T @ a @ perp)))
        if leak > 1e-10:
            return math.inf
    wr = np.clip(np.linalg.eigvalsh(herm_part(a)), 0.0, None)
    pos = wr[wr > 0.0]
    tr_rho_log_rho = float(np.sum(pos * np.log2(pos)))
    # Tr rho log sigma = sum_i log(s_i) <u_i| rho |u_i> over the support.
    diag = np.real(np.einsum("ji,jk,ki->i", vs.conj(), a, vs))
    tr_rho_log_sigma = float(np.sum(diag[on] * np.log2(ws[on])))
    return tr_rho_log_rho - tr_rho_log_sigma


def max_relative_entropy(rho, sigma) -> float:
    """log2 min{ c : rho <= c sigma }; +inf outside sigma's support."""
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    ws, vs, on = _support_split(b)
    if not np.all(on):
        perp = vs[:, ~on]
        leak = float(np.real(np.trace(perp.conj().T @ a @ perp)))
        if leak > 1e-10:
            return math.inf
    inv_root = vs[:, on] * (ws[on] ** -0.5)
    pinched = inv_root.conj().T @ a @ inv_root
    top = float(np.linalg.eigvalsh(herm_part(pinched))[-1])
    if top <= 0.0:
        return -math.inf
    return math.log2(top)


# ---------------------------------------------------------------------------
# classical-quantum states


@dataclass(frozen=True)
class CqState:
    """Finite ensemble: probabilities plus normalized states of one dim."""

    probs: np.ndarray
    states: tuple[DensityOperator, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != p.shape[0]:
            raise ValidationError(
                f"{p.shape[0]} probabilities for {len(self.states)} states"
            )
        if p.size == 0:
            raise ValidationError("empty ensemble")
        if float(p.min()) < -1e-12:
            raise ValidationError(f"negative probability {p.min()!r}")
        if abs(float(p.sum()) - 1.0) > 1e-10:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise ValidationError(f"states of mixed dimensions {sorted(dims)}")
        for i, s in enumerate(self.states):
            if not s.normalized:
                raise ValidationError(f"state {i} has trace {s.trace!r}, not 1")

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def average(self) -> DensityOperator:
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for p, s in zip(self.probs, self.states):
            acc += p * s.mat
        return DensityOperator(acc)


def mutual_info_cq(tau: CqState) -> float:
    """sum_x p_x S(rho_x || rho_bar) in bits."""
    avg = tau.average()
    total = 0.0
    for p, s in zip(tau.probs, tau.states):
        if p > 0.0:
            total += p * relative_entropy(s, avg)
    return total


# ---------------------------------------------------------------------------
# max-information with certificates


@dataclass(frozen=True)
class ImaxCertificate:
    """Certified value of the max-information program.

    ``primal_sigma`` is feasible (dominates every ensemble state), the
    ``dual_ops`` are feasible for the dual (PSD, summing to at most the
    identity), and ``gap`` bounds the bits between the two objective
    values.  Feasibility here is exact up to the stated verifier slacks,
    not up to solver-reported status.
    """

    value: float
    primal_sigma: np.ndarray
    dual_ops: tuple[np.ndarray, ...]
    gap: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "gap": self.gap,
            "primal_sigma": matrix_to_json(self.primal_sigma),
            "dual_ops": [matrix_to_json(y) for y in self.dual_ops],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ImaxCertificate":
        return cls(
            value=float(obj["value"]),
            gap=float(obj["gap"]),
            primal_sigma=matrix_from_json(obj["primal_sigma"]),
            dual_ops=tuple(matrix_from_json(y) for y in obj["dual_ops"]),
        )


def _rigorize_certificate(tau: CqState, sigma_raw, duals_raw) -> ImaxCertificate:
    """Turn solver output into exactly feasible primal/dual points.

    Primal: push sigma' up by the worst domination deficit so that
    sigma' >= rho_x holds with margin.  Dual: clip each Y_x to the PSD
    cone and rescale the family so the sum has top eigenvalue exactly at
    (just below) 1 — any such family is feasible, so its value is a true
    lower bound regardless of how the solver scaled its multipliers.
    """
    m = tau.dim
    sigma = herm_part(np.asarray(sigma_raw, dtype=complex))
    deficit = 0.0
    for p, s in zip(tau.probs, tau.states):
        if p > 0.0:
            top = float(np.linalg.eigvalsh(herm_part(s.mat - sigma))[-1])
            deficit = max(deficit, top)
    sigma = sigma + (deficit + 1e-12) * np.eye(m)

    ys = [psd_clip(y) for y in duals_raw]
    total = sum(ys) if ys else np.zeros((m, m))
    top = float(np.linalg.eigvalsh(herm_part(total))[-1]) if ys else 0.0
    if top > 0.0:
        scale = 1.0 / (top * (1.0 + 1e-12))
        ys = [scale * y for y in ys]

    primal_tr = float(np.real(np.trace(sigma)))
    dual_val = sum(
        float(np.real(np.trace(y @ s.mat))) for y, s in zip(ys, tau.states)
    )
    value = math.log2(primal_tr)
    gap = value - (math.log2(dual_val) if dual_val > 0.0 else -math.inf)
    return ImaxCertificate(value=value, primal_sigma=sigma, dual_ops=tuple(ys), gap=gap)


def _solve_imax_sdp(tau: CqState, solver: str) -> tuple[np.ndarray, list[np.ndarray]]:
    import cvxpy as cp

    m = tau.dim
    sigma = cp.Variable((m, m), hermitian=True)
    by_index: dict[int, object] = {}
    for x, (p, s) in enumerate(zip(tau.probs, tau.states)):
        if p > 0.0:
            by_index[x] = sigma - s.mat >> 0
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(sigma))), list(by_index.values()))
    # accuracy warnings are moot: the iterate is rigorized into an exactly
    # feasible primal/dual pair and re-scored afterwards
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if solver == "CLARABEL":
            prob.solve(solver=cp.CLARABEL)
        else:
            prob.solve(solver=cp.SCS, eps_abs=1e-9, eps_rel=1e-9, max_iters=200_000)
    if sigma.value is None:
        raise ConvergenceFailure(f"max-information SDP returned no iterate ({solver})")
    duals = []
    for x in range(tau.n):
        c = by_index.get(x)
        if c is None or c.dual_value is None:
            duals.append(np.zeros((m, m)))
        else:
            duals.append(np.asarray(c.dual_value))
    return np.asarray(sigma.value), duals


def imax_cq(tau: CqState, tol: float = 1e-6) -> ImaxCertificate:
    """Max-information of a cq state, with a certified duality gap <= tol.

    Raises ``ConvergenceFailure`` (carrying the best certificate found)
    if no solver attempt produces a rigorous gap within tolerance.
    """
    if tol <= 0.0:
        raise InvalidInputError(f"tolerance must be positive, got {tol}")
    best: ImaxCertificate | None = None
    for solver in ("CLARABEL", "SCS"):
        try:
            sigma_raw, duals_raw = _solve_imax_sdp(tau, solver)
        except ConvergenceFailure:
            continue
        cert = _rigorize_certificate(tau, sigma_raw, duals_raw)
        if best is None or cert.gap < best.gap:
            best = cert
        if best.gap <= tol:
            return best
    raise ConvergenceFailure(
        f"max-information gap {best.gap if best else math.inf:.3e} exceeds tol {tol}",
        best=best,
    )


def verify_imax_certificate(
    tau: CqState, cert: ImaxCertificate, tol: float, slack: float = 1e-8
) -> tuple[bool, dict]:
    """Audit a certificate with plain dense linear algebra.

    Checks: sigma' dominates every ensemble state and every dual
    operator is PSD with the family summing to at most identity (each up
    to ``slack`` on the minimum eigenvalue); the claimed value sits
    inside the [dual, primal] bracket (1e-9 float slack); the bracket
    width is at most ``tol``.  Returns (ok, detailed report).
    """
    m = tau.dim
    sigma = np.asarray(cert.primal_sigma, dtype=complex)
    report: dict = {}
    min_dom = math.inf
    for p, s in zip(tau.probs, tau.states):
        if p > 0.0:
            w = np.linalg.eigvalsh(herm_part(sigma - s.mat))
            min_dom = min(min_dom, float(w[0]))
    report["primal_min_domination_eig"] = min_dom
    min_y = min(
        (float(np.linalg.eigvalsh(herm_part(y))[0]) for y in cert.dual_ops),
        default=0.0,
    )
    report["dual_min_eig"] = min_y
    total = sum(cert.dual_ops) if cert.dual_ops else np.zeros((m, m))
    room = float(np.linalg.eigvalsh(np.eye(m) - herm_part(total))[0])
    report["dual_sum_slack_eig"] = room

    primal_tr = float(np.real(np.trace(sigma)))
    dual_val = sum(
        float(np.real(np.trace(y @ s.mat))) for y, s in zip(cert.dual_ops, tau.states)
    )
    primal_bits = math.log2(primal_tr) if primal_tr > 0 else -math.inf
    dual_bits = math.log2(dual_val) if dual_val > 0 else -math.inf
    report["primal_bits"] = primal_bits
    report["dual_bits"] = dual_bits
    report["gap_bits"] = primal_bits - dual_bits

    ok = (
        min_dom >= -slack
        and min_y >= -slack
        and room >= -slack
        and dual_bits - 1e-9 <= cert.value <= primal_bits + 1e-9
        and primal_bits - dual_bits <= tol
    )
    report["ok"] = ok
    return ok, report


# ---------------------------------------------------------------------------
# closed-form smooth lower bound


@dataclass(frozen=True)
class SmoothingParams:
    """Smoothing radius, restricted to [0, 1/8) where the bound is finite."""

    zeta: float

    def __post_init__(self):
        z = float(self.zeta)
        object.__setattr__(self, "zeta", z)
        if not 0.0 <= z < 0.125:
            raise InvalidInputError(f"smoothing radius must lie in [0, 1/8), got {z}")


def smooth_imax_lb(k: int, zeta) -> float:
    """Closed-form lower bound on the zeta-smoothed max-information.

    For the block ensembles built in this package the smoothed
    max-information is at least log2 k - log2((3 - 12 zeta)/(1 - 8 zeta))
    for any smoothing radius zeta in [0, 1/8).
    """
    if k < 1:
        raise InvalidInputError(f"block count must be >= 1, got {k}")
    z = zeta.zeta if isinstance(zeta, SmoothingParams) else SmoothingParams(float(zeta)).zeta
    return math.log2(k) - math.log2((3.0 - 12.0 * z) / (1.0 - 8.0 * z))


# ---------------------------------------------------------------------------
# conditional mutual information in the product case


def _vn_of(mat: np.ndarray) -> float:
    return von_neumann(DensityOperator(mat))


def cond_mi_product(tau_xm, dims, sigma_y) -> float:
    """I(X:M|Y) for a joint state of the form tau_XM (x) sigma_Y.

    Evaluates I(X:M), I(XY:M), and I(X:M|Y) independently on the full
    tripartite state and insists they agree to 1e-8 — the agreement is
    exactly what the product structure buys, so a violation means the
    inputs were not in product form.  Returns the common value in bits.
    """
    dx, dm = (int(d) for d in dims)
    a = _mat(tau_xm)
    b = _mat(sigma_y)
    if a.shape != (dx * dm, dx * dm):
        raise InvalidInputError(
            f"joint XM state has shape {a.shape}, dims say {(dx * dm, dx * dm)}"
        )
    dy = b.shape[0]
    joint = tensor(a, b)  # X (x) M (x) Y
    dims3 = (dx, dm, dy)

    s_xm = _vn_of(a)
    s_y = _vn_of(b)
    s_x = _vn_of(partial_trace(a, (dx, dm), 1))
    s_m = _vn_of(partial_trace(a, (dx, dm), 0))
    i_xm = s_x + s_m - s_xm

    s_xym = _vn_of(joint)
    s_xy = _vn_of(partial_trace(joint, dims3, 1))
    s_my = _vn_of(partial_trace(joint, dims3, 0))
    i_xy_m = s_xy + s_m - s_xym
    i_x_m_given_y = s_xy + s_my - s_xym - s_y

    if abs(i_xm - i_xy_m) > 1e-8 or abs(i_xm - i_x_m_given_y) > 1e-8:
        raise ValidationError(
            "conditional and unconditional mutual informations disagree "
            f"({i_xm:.12f}, {i_xy_m:.12f}, {i_x_m_given_y:.12f}); "
            "joint state is not in product form"
        )
    return i_xm
