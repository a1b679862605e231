"""Command-line experiment runner.

Every subcommand is a thin, deterministic wrapper over the library:
seeded inputs in, canonical JSON/CSV out.  Identical invocations produce
byte-identical artifacts (thread counts change wall time, never bytes).

Exit codes: 0 success; 2 invalid input; 3 validation/verification
failure; 4 infeasible scale; 5 convergence failure (best-effort output
is still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bounds as bounds_mod
from . import concentration as conc
from . import ensemble as ens
from . import entropy as ent
from . import nets
from . import protocol as proto
from .errors import (
    ConvergenceFailure,
    InfeasibleScaleError,
    InvalidInputError,
    ParseError,
    ValidationError,
)
from .qcore import RngSeed, canonical_dumps

__all__ = ["main"]

_REQUIRED = object()


def _count(text: str) -> int:
    """Nonnegative integer, tolerating scientific notation like 1e12."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if not value.is_integer() or value < 0:
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text!r}")
    return int(value)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="oneshot-qcomp",
        description="Seeded experiments on block ensembles: entropies with "
        "certificates, concentration tails, protocol attacks, closed-form bounds.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        p.add_argument("--precision", type=int, help="significant digits in reports")

    g = sub.add_parser("gen-ensemble", help="draw and save a block ensemble")
    g.add_argument("--m", type=_count)
    g.add_argument("--k", type=_count)
    g.add_argument("--groups", type=_count)
    g.add_argument("--seed", type=_count)
    g.add_argument("--out")
    g.add_argument("--format", choices=("json", "bin"))
    common(g)

    e = sub.add_parser("entropies", help="entropy table of a saved ensemble")
    e.add_argument("--ensemble")
    e.add_argument("--tol", type=float)
    e.add_argument("--cert", help="write the max-information certificate here")
    e.add_argument("--out")
    common(e)

    v = sub.add_parser("verify-cert", help="re-check a saved certificate")
    v.add_argument("--ensemble")
    v.add_argument("--cert")
    v.add_argument("--tol", type=float)
    v.add_argument("--out")
    common(v)

    c = sub.add_parser("conc-test", help="random-subspace tail experiment")
    c.add_argument("--m", type=_count)
    c.add_argument("--p", type=_count)
    c.add_argument("--d", type=_count)
    c.add_argument("--l", type=_count, dest="l")
    c.add_argument("--alpha", type=float)
    c.add_argument("--trials", type=_count)
    c.add_argument("--seed", type=_count)
    c.add_argument("--threads", type=int)
    c.add_argument("--csv", help="write per-trial rows here")
    c.add_argument("--out")
    common(c)

    a = sub.add_parser("attack", help="see-saw attack on a saved ensemble")
    a.add_argument("--ensemble")
    a.add_argument("--d", type=_count)
    a.add_argument("--restarts", type=_count)
    a.add_argument("--max-iters", type=_count, dest="max_iters")
    a.add_argument("--tol", type=float)
    a.add_argument("--seed", type=_count)
    a.add_argument("--eps", type=float, help="adds an informational threshold block")
    a.add_argument("--verify", action="store_true")
    a.add_argument("--threads", type=int)
    a.add_argument("--out")
    common(a)

    b = sub.add_parser("bounds", help="closed-form bound evaluators")
    b.add_argument("which", choices=("thm3", "cor5", "ent-lb", "prop6", "thm1", "constants"))
    b.add_argument("--eps", type=float)
    b.add_argument("--nu", type=float)
    b.add_argument("--beta", type=float)
    b.add_argument("--k", type=_count)
    b.add_argument("--m", type=_count)
    b.add_argument("--n", type=_count)
    b.add_argument("--d", type=_count)
    b.add_argument("--comm", type=float)
    b.add_argument("--cc-const", type=float, dest="cc_const")
    b.add_argument("--format", choices=("json", "table", "csv"))
    b.add_argument("--out")
    common(b)

    t = sub.add_parser("net-test", help="build a sphere net and probe its covering")
    t.add_argument("--dim", type=_count)
    t.add_argument("--eps", type=float)
    t.add_argument("--budget", type=_count)
    t.add_argument("--probes", type=_count)
    t.add_argument("--seed", type=_count)
    t.add_argument("--out")
    common(t)

    return top


_DEFAULTS: dict[str, dict] = {
    "gen-ensemble": {
        "m": _REQUIRED, "k": _REQUIRED, "groups": _REQUIRED, "seed": _REQUIRED,
        "out": _REQUIRED, "format": "json", "precision": 12,
    },
    "entropies": {
        "ensemble": _REQUIRED, "tol": 1e-6, "cert": None, "out": None, "precision": 12,
    },
    "verify-cert": {
        "ensemble": _REQUIRED, "cert": _REQUIRED, "tol": None, "out": None,
        "precision": 12,
    },
    "conc-test": {
        "m": _REQUIRED, "p": 1, "d": 1, "l": _REQUIRED, "alpha": _REQUIRED,
        "trials": _REQUIRED, "seed": _REQUIRED, "threads": None, "csv": None,
        "out": None, "precision": 12,
    },
    "attack": {
        "ensemble": _REQUIRED, "d": _REQUIRED, "restarts": 4, "max_iters": 25,
        "tol": 1e-7, "seed": 0, "eps": None, "verify": False, "threads": None,
        "out": None, "precision": 12,
    },
    "bounds": {
        "which": _REQUIRED, "eps": None, "nu": None, "beta": None, "k": None,
        "m": None, "n": None, "d": None, "comm": None, "cc_const": None,
        "format": "json", "out": None, "precision": 12,
    },
    "net-test": {
        "dim": _REQUIRED, "eps": _REQUIRED, "budget": _REQUIRED,
        "probes": _REQUIRED, "seed": _REQUIRED, "out": None, "precision": 12,
    },
}


def _merge_config(args: argparse.Namespace) -> dict:
    """Flags override config file values override defaults; unknown or
    missing-required keys are rejected before any work starts."""
    defaults = _DEFAULTS[args.command]
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise InvalidInputError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ParseError("config must be a JSON object")
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise InvalidInputError(
                f"unknown config keys for {args.command}: {sorted(unknown)}"
            )
    merged = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if isinstance(flag, bool):
            merged[key] = flag or bool(cfg.get(key, False))
            continue
        if flag is not None:
            merged[key] = flag
        elif key in cfg:
            merged[key] = cfg[key]
        elif default is _REQUIRED:
            raise InvalidInputError(f"missing required parameter --{key.replace('_', '-')}")
        else:
            merged[key] = default
    return merged


def _threads(merged: dict) -> int:
    t = merged.get("threads")
    if t is None:
        t = os.environ.get("ONESHOT_QCOMP_THREADS", "1")
    try:
        t = int(t)
    except (TypeError, ValueError):
        raise InvalidInputError(f"bad thread count {t!r}") from None
    if t < 1:
        raise InvalidInputError(f"thread count must be >= 1, got {t}")
    return t


def _emit(obj, merged: dict, path_key: str = "out") -> None:
    text = canonical_dumps(obj, precision=int(merged["precision"]))
    path = merged.get(path_key)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_gen_ensemble(merged: dict) -> int:
    params = ens.EnsembleParams(
        m=int(merged["m"]), k=int(merged["k"]), groups=int(merged["groups"]),
        seed=int(merged["seed"]),
    )
    e = ens.generate_jrs(params)
    ens.save(e, merged["out"], fmt=merged["format"])
    ens.ensemble_average(e)  # raises ValidationError if the I/m identity fails
    summary = {
        "m": params.m, "k": params.k, "groups": params.groups, "n": params.n,
        "seed": params.seed.seed, "avg_check": "pass",
    }
    print(canonical_dumps(summary, precision=int(merged["precision"])))
    return 0


def _entropy_table(e: ens.JrsEnsemble):
    tau = ens.to_cq_state(e)
    avg = ens.ensemble_average(e)
    per_state = []
    for (i, j), s in zip(e.labels(), tau.states):
        per_state.append({
            "i": i,
            "j": j,
            "von_neumann": ent.von_neumann(s),
            "min_entropy": ent.min_entropy(s),
            "rel_to_avg": ent.relative_entropy(s, avg),
            "max_rel_to_avg": ent.max_relative_entropy(s, avg),
        })
    mi = ent.mutual_info_cq(tau)
    qic = ens.qic_prepare_send(e)
    return tau, per_state, mi, qic


def _cmd_entropies(merged: dict) -> int:
    e = ens.load(merged["ensemble"])
    tol = float(merged["tol"])
    tau, per_state, mi, qic = _entropy_table(e)
    code = 0
    try:
        cert = ent.imax_cq(tau, tol=tol)
        converged = True
    except ConvergenceFailure as exc:
        if exc.best is None:
            raise
        cert = exc.best
        converged = False
        code = 5
    report = {
        "ensemble": {
            "m": e.params.m, "k": e.params.k, "groups": e.params.groups,
            "n": e.params.n, "seed": e.params.seed.seed,
        },
        "per_state": per_state,
        "mutual_info_bits": mi,
        "imax_bits": cert.value,
        "imax_gap_bits": cert.gap,
        "imax_converged": converged,
        "qic_bits": qic,
    }
    if merged["cert"]:
        cert_obj = cert.to_json()
        cert_obj["tol"] = tol
        with open(merged["cert"], "w", encoding="utf-8") as fh:
            fh.write(canonical_dumps(cert_obj, precision=17))
            fh.write("\n")
    _emit(report, merged)
    return code


def _cmd_verify_cert(merged: dict) -> int:
    e = ens.load(merged["ensemble"])
    try:
        with open(merged["cert"], "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read certificate: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"certificate is not valid JSON: {exc}") from exc
    cert = ent.ImaxCertificate.from_json(obj)
    tol = merged["tol"]
    if tol is None:
        tol = float(obj.get("tol", 1e-6))
    ok, detail = ent.verify_imax_certificate(ens.to_cq_state(e), cert, tol=float(tol))
    detail["tol"] = float(tol)
    detail["value_bits"] = cert.value
    _emit(detail, merged)
    return 0 if ok else 3


def _cmd_conc_test(merged: dict) -> int:
    params = conc.Lemma2Params(
        m=int(merged["m"]), p=int(merged["p"]), d=int(merged["d"]),
        ell=int(merged["l"]), alpha=float(merged["alpha"]),
        trials=int(merged["trials"]), seed=int(merged["seed"]),
    )
    threads = _threads(merged)
    w = conc.default_witness(params)
    stats = conc.run_trials(params, w, threads=threads)
    holds, lhs, rhs = conc.lemma2_condition(params)
    report = conc.TailReport(
        threshold=params.threshold,
        empirical_tail=float((stats >= params.threshold).mean()),
        theoretical_bound=conc.lemma2_bound(params),
        condition_holds=holds,
        mean_value=float(stats.mean()),
        trials=params.trials,
    )
    if merged["csv"]:
        rows = conc.trial_rows(stats, params.threshold)
        with open(merged["csv"], "w", encoding="utf-8") as fh:
            fh.write(conc.rows_to_csv(rows))
    out = {
        "params": {
            "m": params.m, "p": params.p, "d": params.d, "l": params.ell,
            "alpha": params.alpha, "trials": params.trials, "seed": params.seed.seed,
        },
        "condition_lhs": lhs,
        "condition_rhs": rhs,
        "report": report.to_json(),
    }
    _emit(out, merged)
    return 0


def _cmd_attack(merged: dict) -> int:
    e = ens.load(merged["ensemble"])
    d = int(merged["d"])
    opts = {
        "restarts": int(merged["restarts"]),
        "max_iters": int(merged["max_iters"]),
        "tol": float(merged["tol"]),
        "seed": int(merged["seed"]),
    }
    result = proto.attack_seesaw(e, d, opts)
    report = proto.attack_report_json(result, e, d, opts)
    costs = proto.cost_report(result.protocol)
    report["costs"] = costs.to_json()
    eps = merged["eps"]
    if eps is not None:
        # One-sided sanity block: at true theorem scales d below the bound
        # could not reach error <= eps/2, but desk-scale parameters never
        # satisfy the preconditions, so this is informational only.
        cor5 = bounds_mod.cor5_report(float(eps), e.params.k, e.params.m, e.params.n)
        report["threshold_note"] = {
            "informational": True,
            "epsilon": float(eps),
            "bound_bits": cor5.bound_bits,
            "comm_bits": costs.comm_bits,
            "below_threshold": bool(costs.comm_bits < cor5.bound_bits),
            "error_beats_eps_half": bool(result.error <= float(eps) / 2.0),
            "preconditions_hold": cor5.all_conditions_hold,
        }
    if merged["verify"]:
        text = canonical_dumps(report, precision=int(merged["precision"]))
        recovered = proto.protocol_from_json(json.loads(text)["protocol"])
        recomputed = proto.average_error(recovered, e)
        if abs(recomputed - result.error) > 1e-9:
            raise ValidationError(
                f"re-verification mismatch: reported {result.error!r}, "
                f"recomputed {recomputed!r}"
            )
        report["verified_error"] = recomputed
    _emit(report, merged)
    return 0 if result.converged else 5


def _bound_report_lines(obj: dict) -> str:
    lines = []
    for key in sorted(obj):
        if key == "conditions":
            continue
        val = obj[key]
        if isinstance(val, float):
            val = format(val, ".12g")
        lines.append(f"{key:24s} {val}")
    conds = obj.get("conditions", {})
    if conds:
        lines.append(f"{'condition':16s} {'holds':6s} {'lhs':>20s} {'rhs':>20s}")
        for name in sorted(conds):
            c = conds[name]
            lines.append(
                f"{name:16s} {str(c['holds']).lower():6s} "
                f"{format(c['lhs'], '.12g'):>20s} {format(c['rhs'], '.12g'):>20s}"
            )
    return "\n".join(lines)


def _bound_report_csv(obj: dict) -> str:
    rows = ["field,value"]
    for key in sorted(obj):
        if key == "conditions":
            continue
        val = obj[key]
        if isinstance(val, float):
            val = format(val, ".12g")
        rows.append(f"{key},{val}")
    conds = obj.get("conditions", {})
    if conds:
        rows.append("condition,holds,lhs,rhs")
        for name in sorted(conds):
            c = conds[name]
            rows.append(
                f"{name},{str(c['holds']).lower()},"
                f"{format(c['lhs'], '.12g')},{format(c['rhs'], '.12g')}"
            )
    return "\n".join(rows)


def _require(merged: dict, which: str, *keys: str) -> None:
    missing = [k for k in keys if merged.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise InvalidInputError(f"bounds {which} needs {flags}")


def _cmd_bounds(merged: dict) -> int:
    which = merged["which"]
    if which == "thm3":
        _require(merged, which, "eps", "nu", "beta", "k", "m", "n", "d")
        report = bounds_mod.thm3_check(
            bounds_mod.Thm3Params(
                epsilon=float(merged["eps"]), nu=float(merged["nu"]),
                beta=float(merged["beta"]), k=int(merged["k"]), m=int(merged["m"]),
                n=int(merged["n"]), d=int(merged["d"]),
            )
        ).to_json()
    elif which == "cor5":
        _require(merged, which, "eps", "k", "m", "n")
        report = bounds_mod.cor5_report(
            float(merged["eps"]), int(merged["k"]), int(merged["m"]), int(merged["n"])
        ).to_json()
    elif which == "ent-lb":
        _require(merged, which, "eps", "m", "comm")
        value = bounds_mod.ent_lb_given_comm(
            float(merged["eps"]), int(merged["m"]), float(merged["comm"])
        )
        report = {
            "name": "ent-lb",
            "epsilon": float(merged["eps"]),
            "m": int(merged["m"]),
            "comm_bits": float(merged["comm"]),
            "value_bits": value,
            "vacuous": bool(value <= 0.0),
        }
    elif which == "prop6":
        _require(merged, which, "eps", "k", "cc_const")
        value = bounds_mod.prop6_cost(
            int(merged["k"]), float(merged["eps"]), float(merged["cc_const"])
        )
        report = {
            "name": "prop6",
            "k": int(merged["k"]),
            "epsilon": float(merged["eps"]),
            "cc_const": float(merged["cc_const"]),
            "value_bits": value,
        }
    elif which == "thm1":
        _require(merged, which, "eps", "k", "m")
        report = bounds_mod.thm1_summary(
            int(merged["k"]), int(merged["m"]), float(merged["eps"])
        ).to_json()
    else:  # constants
        report = bounds_mod.constants_report()

    fmt = merged["format"]
    if fmt == "json":
        _emit(report, merged)
    else:
        text = _bound_report_lines(report) if fmt == "table" else _bound_report_csv(report)
        if merged.get("out"):
            with open(merged["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
                fh.write("\n")
        else:
            print(text)
    return 0


def _cmd_net_test(merged: dict) -> int:
    dim = int(merged["dim"])
    eps = float(merged["eps"])
    net = nets.sphere_net(dim, eps, int(merged["seed"]), int(merged["budget"]))
    max_gap, ok = nets.check_covering(
        net, int(merged["probes"]), RngSeed(int(merged["seed"]), stream=1)
    )
    report = {
        "dim": dim,
        "epsilon": eps,
        "points": len(net.points),
        "size_bound": nets.sphere_net_size_bound(dim, eps),
        "max_gap": max_gap,
        "covered": ok,
    }
    _emit(report, merged)
    return 0 if ok else 3


_HANDLERS = {
    "gen-ensemble": _cmd_gen_ensemble,
    "entropies": _cmd_entropies,
    "verify-cert": _cmd_verify_cert,
    "conc-test": _cmd_conc_test,
    "attack": _cmd_attack,
    "bounds": _cmd_bounds,
    "net-test": _cmd_net_test,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        merged = _merge_config(args)
        return _HANDLERS[args.command](merged)
    except (InvalidInputError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleScaleError as exc:
        print(f"infeasible scale: {exc}", file=sys.stderr)
        return 4
    except ConvergenceFailure as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
