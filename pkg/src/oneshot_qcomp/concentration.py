"""Tail experiments for random-subspace projections.

The quantity under study: draw a random ell-dimensional subspace Z of
C^m, project onto it, tensor with an identity on C^p, and measure the
semi-norm of the result restricted to a fixed witness subspace W.  Its
mean is ell/m; the exponential tail bound and its side condition are
evaluated exactly, and the empirical tail is estimated over seeded,
order-independent trials (trial t always draws from stream t, so a
threaded run is bit-identical to a serial one).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ValidationError
from .nets import seminorm
from .qcore import RngSeed, Subspace, as_generator, haar_unitary, tensor

__all__ = [
    "Lemma2Params",
    "TailReport",
    "random_subspace",
    "lemma2_condition",
    "lemma2_bound",
    "default_witness",
    "run_trials",
    "lemma2_experiment",
    "trial_rows",
    "rows_to_csv",
    "thm2_bound",
    "lipschitz_probe",
]


@dataclass(frozen=True)
class Lemma2Params:
    """Shape of one tail experiment.

    m: ambient dimension; p: identity factor dimension; d: witness
    subspace dimension; ell: random-subspace dimension; alpha > 2: tail
    threshold multiplier (threshold = alpha * ell / m); trials: sample
    count; seed: master seed (trial t uses stream t).
    """

    m: int
    p: int
    d: int
    ell: int
    alpha: float
    trials: int
    seed: RngSeed

    def __post_init__(self):
        if isinstance(self.seed, (int, np.integer)):
            object.__setattr__(self, "seed", RngSeed(int(self.seed)))
        if self.m < 1 or self.p < 1 or self.d < 1:
            raise InvalidInputError(
                f"m, p, d must be positive, got {(self.m, self.p, self.d)}"
            )
        if not 1 <= self.ell <= self.m:
            raise InvalidInputError(f"need 1 <= ell <= m, got ell={self.ell}, m={self.m}")
        if not self.alpha > 2.0:
            raise InvalidInputError(f"alpha must exceed 2, got {self.alpha}")
        if self.trials < 1:
            raise InvalidInputError(f"trials must be >= 1, got {self.trials}")
        if self.d > self.m * self.p:
            raise InvalidInputError(
                f"witness dim {self.d} exceeds ambient {self.m * self.p}"
            )

    @property
    def threshold(self) -> float:
        return self.alpha * self.ell / self.m


@dataclass(frozen=True)
class TailReport:
    """Summary of one tail experiment."""

    threshold: float
    empirical_tail: float
    theoretical_bound: float
    condition_holds: bool
    mean_value: float
    trials: int

    def __post_init__(self):
        if not 0.0 <= self.empirical_tail <= 1.0:
            raise ValidationError(f"empirical tail {self.empirical_tail!r} outside [0,1]")
        if not self.theoretical_bound > 0.0:
            raise ValidationError(f"bound {self.theoretical_bound!r} must be positive")

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "empirical_tail": self.empirical_tail,
            "theoretical_bound": self.theoretical_bound,
            "condition_holds": self.condition_holds,
            "mean_value": self.mean_value,
            "trials": self.trials,
        }


def random_subspace(m: int, ell: int, rng) -> Subspace:
    """Haar-random ell-dimensional subspace of C^m."""
    if not 1 <= ell <= m:
        raise InvalidInputError(f"need 1 <= ell <= m, got ell={ell}, m={m}")
    return Subspace(haar_unitary(m, rng)[:, :ell])


def lemma2_condition(params: Lemma2Params) -> tuple[bool, float, float]:
    """Side condition: (alpha-2)^2 ell^2 (m-2) >= 1536 d m^2 ln(8m/(alpha ell)).

    Both sides are returned so callers can see how far from the regime
    they are; note the right side goes nonpositive once alpha*ell >= 8m,
    making the condition vacuously true.
    """
    lhs = (params.alpha - 2.0) ** 2 * params.ell**2 * (params.m - 2)
    rhs = 1536.0 * params.d * params.m**2 * math.log(
        8.0 * params.m / (params.alpha * params.ell)
    )
    return lhs >= rhs, lhs, rhs


def lemma2_bound(params: Lemma2Params) -> float:
    """Tail bound exp(-(alpha-2)^2 ell^2 (m-2) / (768 m^2))."""
    expo = (params.alpha - 2.0) ** 2 * params.ell**2 * (params.m - 2) / (768.0 * params.m**2)
    return math.exp(-expo)


def default_witness(params: Lemma2Params) -> Subspace:
    """Deterministic witness: drawn from the stream just past the trials."""
    return random_subspace(params.m * params.p, params.d, params.seed.child(params.trials))


def _statistic(params: Lemma2Params, w: Subspace, trial: int) -> float:
    z = random_subspace(params.m, params.ell, params.seed.child(trial))
    proj = z.projector()
    op = proj if params.p == 1 else tensor(proj, np.eye(params.p))
    return seminorm(op, w)


def run_trials(params: Lemma2Params, w: Subspace | None = None, threads: int = 1) -> np.ndarray:
    """Per-trial statistics, ordered by trial index.

    Results are a pure function of (params, w): each trial draws from
    its own stream, so the thread count changes wall time only.
    """
    if w is None:
        w = default_witness(params)
    if w.dim != params.m * params.p:
        raise InvalidInputError(
            f"witness ambient dim {w.dim} != m*p = {params.m * params.p}"
        )
    if w.rank != params.d:
        raise InvalidInputError(f"witness rank {w.rank} != d = {params.d}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(lambda t: _statistic(params, w, t), range(params.trials)))
    else:
        stats = [_statistic(params, w, t) for t in range(params.trials)]
    return np.asarray(stats, dtype=float)


def lemma2_experiment(
    params: Lemma2Params, w: Subspace | None = None, threads: int = 1
) -> TailReport:
    """Estimate the tail probability and compare to the exact bound."""
    stats = run_trials(params, w, threads=threads)
    holds, _, _ = lemma2_condition(params)
    return TailReport(
        threshold=params.threshold,
        empirical_tail=float(np.mean(stats >= params.threshold)),
        theoretical_bound=lemma2_bound(params),
        condition_holds=holds,
        mean_value=float(np.mean(stats)),
        trials=params.trials,
    )


def trial_rows(stats: np.ndarray, threshold: float) -> list[tuple[int, float, int]]:
    """(trial, statistic, exceeded) rows for CSV emission."""
    return [
        (t, float(s), int(s >= threshold)) for t, s in enumerate(np.asarray(stats))
    ]


def rows_to_csv(rows) -> str:
    lines = ["trial,statistic,exceeded"]
    for t, s, ex in rows:
        lines.append(f"{t},{format(s, '.17g')},{ex}")
    return "\n".join(lines) + "\n"


def thm2_bound(m: int, kappa: float, t: float) -> float:
    """Concentration bound exp(-(m-2) t^2 / (24 kappa^2)) for a
    kappa-Lipschitz function of a Haar unitary."""
    if kappa <= 0.0:
        raise InvalidInputError(f"Lipschitz constant must be positive, got {kappa}")
    if t < 0.0:
        raise InvalidInputError(f"deviation must be nonnegative, got {t}")
    return math.exp(-(m - 2) * t * t / (24.0 * kappa * kappa))


def lipschitz_probe(
    m: int, p: int, w: Subspace, ell: int, pairs: int, rng
) -> float:
    """Empirical Lipschitz ratio of U -> <v|(U P U* (x) I)|v>.

    P projects onto a fixed ell-dimensional coordinate subspace, |v> is
    sampled inside the witness subspace per pair, and the ratio
    |f(U)-f(V)| / ||U-V||_F is maximized over `pairs` Haar pairs.  The
    function is 2-Lipschitz in Frobenius norm, so values should never
    exceed 2 (plus float noise).  Degenerate pairs (||U-V|| ~ 0) are
    skipped.
    """
    if not 1 <= ell <= m:
        raise InvalidInputError(f"need 1 <= ell <= m, got ell={ell}, m={m}")
    if w.dim != m * p:
        raise InvalidInputError(f"witness ambient dim {w.dim} != m*p = {m * p}")
    if pairs < 1:
        raise InvalidInputError(f"pair count must be >= 1, got {pairs}")
    g = as_generator(rng)
    max_ratio = 0.0
    for _ in range(pairs):
        u = haar_unitary(m, g)
        v = haar_unitary(m, g)
        coeff = g.standard_normal(w.rank) + 1j * g.standard_normal(w.rank)
        coeff /= np.linalg.norm(coeff)
        vec = (w.basis @ coeff).reshape(m, p)  # columns split the identity factor
        # <v|(U P U* (x) I)|v> = || top ell rows of U* vec ||_F^2
        fu = float(np.linalg.norm((u.conj().T @ vec)[:ell, :]) ** 2)
        fv = float(np.linalg.norm((v.conj().T @ vec)[:ell, :]) ** 2)
        denom = float(np.linalg.norm(u - v))
        if denom < 1e-12:
            continue
        max_ratio = max(max_ratio, abs(fu - fv) / denom)
    return max_ratio
