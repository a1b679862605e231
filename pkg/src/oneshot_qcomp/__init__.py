"""Numerical laboratory for one-shot compression of state ensembles.

Submodules:

* ``qcore``         linear-algebra primitives, RNG streams, serialization
* ``metrics``       trace distance, fidelity, Helstrom, distance reports
* ``entropy``       entropies, max-information with SDP certificates
* ``ensemble``      seeded random block ensembles and their I/O
* ``nets``          sphere/subspace discretizations and the witness seminorm
* ``concentration`` tail experiments for random-subspace overlaps
* ``protocol``      compression protocols, costs, see-saw attacks
* ``bounds``        closed-form achievability/converse bound evaluators
* ``cli``           deterministic command-line front end
"""

from .errors import (
    ConvergenceFailure,
    InfeasibleScaleError,
    InvalidInputError,
    ParseError,
    ValidationError,
)
from .qcore import (
    ChannelRep,
    DensityOperator,
    PureState,
    RngSeed,
    Subspace,
    canonical_dumps,
    haar_unitary,
    partial_trace,
)
from .metrics import (
    DistanceReport,
    distance_report,
    fidelity,
    helstrom,
    purified_distance,
    trace_distance,
)
from .entropy import (
    CqState,
    ImaxCertificate,
    SmoothingParams,
    imax_cq,
    mutual_info_cq,
    smooth_imax_lb,
    verify_imax_certificate,
    von_neumann,
)
from .ensemble import (
    EnsembleParams,
    JrsEnsemble,
    ensemble_average,
    generate_jrs,
    jrs_certificate,
    qic_prepare_send,
    to_cq_state,
)
from .nets import SphereNet, SubspaceNet, check_covering, seminorm, sphere_net
from .concentration import Lemma2Params, TailReport, lemma2_experiment
from .protocol import (
    AssistedProtocol,
    AttackResult,
    UnassistedProtocol,
    attack_seesaw,
    average_error,
    best_constant_output,
    cost_report,
    trivial_protocols,
)
from .bounds import BoundReport, Thm3Params, cor5_report, gamma, thm3_check

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "ConvergenceFailure",
    "InfeasibleScaleError",
    "InvalidInputError",
    "ParseError",
    "ValidationError",
    # qcore
    "ChannelRep",
    "DensityOperator",
    "PureState",
    "RngSeed",
    "Subspace",
    "canonical_dumps",
    "haar_unitary",
    "partial_trace",
    # metrics
    "DistanceReport",
    "distance_report",
    "fidelity",
    "helstrom",
    "purified_distance",
    "trace_distance",
    # entropy
    "CqState",
    "ImaxCertificate",
    "SmoothingParams",
    "imax_cq",
    "mutual_info_cq",
    "smooth_imax_lb",
    "verify_imax_certificate",
    "von_neumann",
    # ensemble
    "EnsembleParams",
    "JrsEnsemble",
    "ensemble_average",
    "generate_jrs",
    "jrs_certificate",
    "qic_prepare_send",
    "to_cq_state",
    # nets
    "SphereNet",
    "SubspaceNet",
    "check_covering",
    "seminorm",
    "sphere_net",
    # concentration
    "Lemma2Params",
    "TailReport",
    "lemma2_experiment",
    # protocol
    "AssistedProtocol",
    "AttackResult",
    "UnassistedProtocol",
    "attack_seesaw",
    "average_error",
    "best_constant_output",
    "cost_report",
    "trivial_protocols",
    # bounds
    "BoundReport",
    "Thm3Params",
    "cor5_report",
    "gamma",
    "thm3_check",
]
