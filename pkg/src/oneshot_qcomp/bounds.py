"""Closed-form cost bounds, side conditions, and their constants.

Everything here is plain arithmetic — no linear algebra, no sampling —
evaluated in float64 and cross-checked by the test suite against an
extended-precision oracle.  All outputs are in bits (base-2 logs).

Asymptotic terms are never given invented constants: where a bound is
stated with an unspecified O(.) factor, the evaluator takes that
constant as an explicit caller argument instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import InvalidInputError

__all__ = [
    "C1",
    "C3",
    "C2_BITS",
    "gamma",
    "ConditionCheck",
    "BoundReport",
    "Thm3Params",
    "thm3_check",
    "cor5_report",
    "ent_lb_given_comm",
    "prop6_cost",
    "thm1_summary",
    "constants_report",
]

# The three explicit constants behind the communication lower bounds:
# 24*768 + 1, 6*2*8*768 + 1, and log2(16*768).
C1: int = 24 * 768 + 1
C3: int = 6 * 2 * 8 * 768 + 1
C2_BITS: float = math.log2(16 * 768)


def gamma(epsilon: float, nu: float) -> float:
    """gamma = (1 - eps/2 - nu)^2 / 6144, the tail-exponent scale."""
    margin = 1.0 - epsilon / 2.0 - nu
    if margin <= 0.0:
        raise InvalidInputError(
            f"need nu < 1 - eps/2, got eps={epsilon}, nu={nu}"
        )
    return margin * margin / 6144.0


class ConditionCheck(NamedTuple):
    holds: bool
    lhs: float
    rhs: float


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: its conditions, value, and context numbers."""

    name: str
    conditions: dict[str, ConditionCheck]
    gamma: float | None = None
    bound_bits: float | None = None
    vacuous: bool | None = None
    notes: dict[str, float] = field(default_factory=dict)

    @property
    def all_conditions_hold(self) -> bool:
        return all(c.holds for c in self.conditions.values())

    def to_json(self) -> dict:
        out: dict = {
            "name": self.name,
            "conditions": {
                k: {"holds": c.holds, "lhs": c.lhs, "rhs": c.rhs}
                for k, c in self.conditions.items()
            },
            "all_conditions_hold": self.all_conditions_hold,
        }
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.bound_bits is not None:
            out["bound_bits"] = self.bound_bits
        if self.vacuous is not None:
            out["vacuous"] = self.vacuous
        if self.notes:
            out["notes"] = dict(self.notes)
        return out


@dataclass(frozen=True)
class Thm3Params:
    """Parameters of the incompressibility statement."""

    epsilon: float
    nu: float
    beta: float
    k: int
    m: int
    n: int
    d: int

    def __post_init__(self):
        if not 0.0 < self.epsilon < 2.0:
            raise InvalidInputError(f"epsilon must lie in (0, 2), got {self.epsilon}")
        if not 0.0 < self.nu < 1.0 - self.epsilon / 2.0:
            raise InvalidInputError(
                f"nu must lie in (0, 1 - eps/2), got nu={self.nu}, eps={self.epsilon}"
            )
        if not 0.0 < self.beta < 1.0:
            raise InvalidInputError(f"beta must lie in (0, 1), got {self.beta}")
        for name, v in (("k", self.k), ("m", self.m), ("n", self.n), ("d", self.d)):
            if v < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {v}")
        if self.m % self.k:
            raise InvalidInputError(f"k={self.k} must divide m={self.m}")
        if self.n % self.k:
            raise InvalidInputError(f"k={self.k} must divide n={self.n}")


def thm3_check(p: Thm3Params) -> BoundReport:
    """Evaluate the three displayed side conditions, exactly.

    k >= 4/(1 - eps/2 - nu);
    m > max{(3/g) ln(e/(1-beta)), (3/g) ln k, 2 + (d/g) ln(16/(1-eps/2-nu))};
    n > (6 k d^2 m / (g (1-beta))) ln(8 sqrt(d)/nu),  g = gamma(eps, nu).
    """
    margin = 1.0 - p.epsilon / 2.0 - p.nu
    g = gamma(p.epsilon, p.nu)
    m_floor = max(
        3.0 / g * math.log(math.e / (1.0 - p.beta)),
        3.0 / g * math.log(p.k),
        2.0 + p.d / g * math.log(16.0 / margin),
    )
    n_floor = 6.0 * p.k * p.d**2 * p.m / (g * (1.0 - p.beta)) * math.log(
        8.0 * math.sqrt(p.d) / p.nu
    )
    conditions = {
        "k_lower": ConditionCheck(p.k >= 4.0 / margin, float(p.k), 4.0 / margin),
        "m_lower": ConditionCheck(p.m > m_floor, float(p.m), m_floor),
        "n_lower": ConditionCheck(p.n > n_floor, float(p.n), n_floor),
    }
    return BoundReport(name="thm3", conditions=conditions, gamma=g)


def _cor5_bits(epsilon: float, m: int) -> float:
    return (
        math.log2(m)
        - 2.0 * math.log2(1.0 / (1.0 - epsilon))
        - math.log2(math.log(16.0 / (1.0 - epsilon)))
        - C2_BITS
    )


def cor5_report(epsilon: float, k: int, m: int, n: int) -> BoundReport:
    """Communication + entanglement lower bound with explicit constants.

    bound = log2 m - 2 log2(1/(1-eps)) - log2 ln(16/(1-eps)) - log2 12288,
    valid under k >= 6/(1-eps), m >= c1 ln(k)/(1-eps)^2, and
    n >= (c3/(1-eps)^2) k m^3 ln(16 sqrt(m)/eps).  A nonpositive bound is
    reported as vacuous, not an error.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    for name, v in (("k", k), ("m", m), ("n", n)):
        if v < 1:
            raise InvalidInputError(f"{name} must be a positive integer, got {v}")
    one = 1.0 - epsilon
    bits = _cor5_bits(epsilon, m)
    conditions = {
        "k_lower": ConditionCheck(k >= 6.0 / one, float(k), 6.0 / one),
        "m_lower": ConditionCheck(
            m >= C1 * math.log(k) / one**2, float(m), C1 * math.log(k) / one**2
        ),
        "n_lower": ConditionCheck(
            n >= C3 / one**2 * k * m**3 * math.log(16.0 * math.sqrt(m) / epsilon),
            float(n),
            C3 / one**2 * k * m**3 * math.log(16.0 * math.sqrt(m) / epsilon),
        ),
    }
    return BoundReport(
        name="cor5",
        conditions=conditions,
        bound_bits=bits,
        vacuous=bool(bits <= 0.0),
        notes={"c1": float(C1), "c3": float(C3), "c2_bits": C2_BITS},
    )


def ent_lb_given_comm(epsilon: float, m: int, comm_bits: float) -> float:
    """Entanglement floor left after subtracting the communication spent.

    The total-cost bound minus ``comm_bits``; a nonpositive value means
    the bound says nothing at these parameters (callers flag, not raise).
    """
    if comm_bits < 0.0:
        raise InvalidInputError(f"communication bits must be >= 0, got {comm_bits}")
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    return _cor5_bits(epsilon, m) - comm_bits


def prop6_cost(k: int, epsilon: float, cc_const: float) -> float:
    """Achievable assisted cost (1/2) log2 k + cc_const * log2 log2(1/eps).

    The double-log term is clamped at zero (it would go negative for
    eps >= 1/2); its constant is caller-supplied, never invented.
    """
    if k < 1:
        raise InvalidInputError(f"k must be a positive integer, got {k}")
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    inner = math.log2(1.0 / epsilon)
    tail = math.log2(inner) if inner > 1.0 else 0.0
    return 0.5 * math.log2(k) + cc_const * tail


def thm1_summary(k: int, m: int, epsilon: float) -> BoundReport:
    """Both total-cost lower bounds side by side, plus the exact
    information values of the hard ensemble.

    The 3-log form reuses the explicit c2; it crosses the sharper
    2-log form at 1/(1-eps) = ln(16/(1-eps)), i.e. eps ~ 0.767 — below
    that the 3-log form is the larger (stronger-looking) expression.
    Precondition failures are reported in the conditions map, not fatal.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if k < 1 or m < 1:
        raise InvalidInputError(f"k, m must be positive integers, got {k}, {m}")
    one = 1.0 - epsilon
    thm1_bits = math.log2(m) - 3.0 * math.log2(1.0 / one) - C2_BITS
    cor5_bits = _cor5_bits(epsilon, m)
    conditions = {
        "k_lower": ConditionCheck(k >= 6.0 / one, float(k), 6.0 / one),
        "m_lower": ConditionCheck(
            m >= C1 * math.log(k) / one**2, float(m), C1 * math.log(k) / one**2
        ),
    }
    return BoundReport(
        name="thm1",
        conditions=conditions,
        bound_bits=thm1_bits,
        vacuous=bool(thm1_bits <= 0.0),
        notes={
            "cor5_bits": cor5_bits,
            "mi_bits": math.log2(k),
            "imax_bits": math.log2(k),
        },
    )


def constants_report() -> dict:
    """The explicit constants, for the CLI and for exact-value tests."""
    return {"c1": C1, "c3": C3, "c2_bits": C2_BITS}
