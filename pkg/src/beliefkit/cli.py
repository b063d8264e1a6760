"""Command line entry point ``beliefkit``.

Exit status is 0 on success, 1 on a domain error and 2 on a usage error.
Every randomized command takes ``--seed``; equal inputs and seed give
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import geometry as geo
from . import io
from . import limits as lim
from . import maxent as mx
from . import pac
from . import regression as reg
from . import suites
from . import total_belief as tb
from .combination import RULES as _RULE_TABLE, combine_all, dempster_condition
from .errors import BeliefError, FrameError
from .frames import Frame, MassFunction
from .likelihood import (
    SUPPORTED_RULES,
    bernoulli_likelihood_surface,
    belief_likelihood,
    lower_upper_likelihood,
)
from .multivariate import ProductFocalElement

RULES = tuple(_RULE_TABLE)


class UsageError(Exception):
    """Raised for invocations that parse but cannot be honoured."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


# helpers -------------------------------------------------------------------------------


def _read_mass(path: str, strict: bool) -> MassFunction:
    return io.read_json(path, strict, kind="mass")


def _event(frame: Frame, text: str) -> int:
    """Mask of a comma-separated label list, matching labels by their text."""
    by_text = {str(lab): lab for lab in frame.labels}
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise UsageError("empty event")
    unknown = [s for s in names if s not in by_text]
    if unknown:
        raise FrameError(f"labels {unknown} are not in the frame")
    return frame.mask(by_text[s] for s in names)


def _emit(args, obj=None, text: str | None = None) -> None:
    if text is None:
        text = io.serialize(obj)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(args, name: str, data: dict) -> None:
    _emit(args, io.Report(name, data))


def _csv(args, header, rows) -> None:
    _emit(args, text=io.rows_to_csv(header, rows))


def _focal_rows(m: MassFunction):
    return [(" ".join(map(str, m.frame.labels_of(k))), v) for k, v in m.items()]


def _rng(args) -> np.random.Generator:
    return np.random.default_rng(args.seed)


# commands ---------------------------------------------------------------------------------


def cmd_combine(args) -> None:
    if len(args.files) < 2:
        raise UsageError("combine needs at least two mass files")
    ms = [_read_mass(f, args.strict) for f in args.files]
    out = combine_all(args.rule, ms)
    if args.format == "csv":
        _csv(args, ["set", "mass"], _focal_rows(out))
    else:
        _emit(args, out)


def cmd_condition(args) -> None:
    m = _read_mass(args.file, args.strict)
    out = dempster_condition(m, _event(m.frame, args.on))
    if args.format == "csv":
        _csv(args, ["set", "mass"], _focal_rows(out))
    else:
        _emit(args, out)


def cmd_likelihood(args) -> None:
    model = _read_mass(args.model, args.strict)
    text = Path(args.trials).read_text(encoding="utf-8")
    sample = [row["outcome"].strip() for _, row in io._read_rows(text, ("outcome",))]
    by_text = {str(lab): lab for lab in model.frame.labels}
    unknown = sorted({s for s in sample if s not in by_text})
    if unknown:
        raise FrameError(f"outcomes {unknown} are not in the model frame")
    labels = [by_text[s] for s in sample]
    if args.format == "csv":
        if model.frame.size != 2:
            raise UsageError("the likelihood surface needs a binary model")
        success = by_text.get(args.success, model.frame.labels[0]) if args.success else model.frame.labels[0]
        k = sum(lab == success for lab in labels)
        surf = bernoulli_likelihood_surface(k, len(labels), args.grid)
        _csv(args, ["p", "q", "lower", "upper"], surf.rows())
        return
    conds = [model] * len(labels)
    bounds = lower_upper_likelihood(conds, labels)
    data = {
        "trials": len(labels),
        "lower": bounds.lower,
        "upper": bounds.upper,
        "conjectural": bounds.conjectural,
        "rule": args.rule,
    }
    if args.rule in SUPPORTED_RULES:
        event = ProductFocalElement(tuple(model.frame.singleton(x) for x in labels))
        data["belief"] = belief_likelihood(conds, args.rule, event)
    _report(args, "likelihood", data)


def _fit_dict(res: reg.FitResult) -> dict:
    p = res.params
    return {
        "target": res.target,
        "beta0": p.beta0,
        "beta1": p.beta1,
        "beta2": p.beta2,
        "objective": res.objective,
        "kkt_residual": res.kkt_residual,
        "iterations": res.iterations,
        "converged": res.converged,
        "diagnostics": res.diagnostics,
    }


def cmd_fit_logistic(args) -> None:
    data = io.dataset_from_csv(Path(args.data).read_text(encoding="utf-8"))
    config = reg.FitConfig(strict=args.strict)
    targets = reg.TARGETS if args.target == "both" else (args.target,)
    fits = {t: reg.fit(data, t, config) for t in targets}
    if args.format == "csv":
        _csv(args, ["target", "beta0", "beta1", "beta2", "kkt_residual"], [
            (t, r.params.beta0, r.params.beta1, r.params.beta2, r.kkt_residual) for t, r in fits.items()
        ])
        return
    _report(args, "fit-logistic", {t: _fit_dict(r) for t, r in fits.items()})


def cmd_total_belief(args) -> None:
    prob = io.read_json(args.problem, args.strict, kind="total-belief-problem")
    m = tb.construct_total(prob)
    system = tb.build_constraint_system(prob)
    ver = tb.verify_total(prob, m)
    data = {
        "solution": io.to_document(m),
        "verification": {"p1": ver.p1_ok, "p2": ver.p2_ok, "residual": ver.residual},
        "admissible_elements": system.unknown_count,
        "independent_constraints": system.independent,
        "rank": system.rank,
    }
    if args.candidate:
        cand = io.read_json(args.candidate, args.strict, kind="mass")
        cv = tb.verify_total(prob, cand)
        data["candidate"] = {"p1": cv.p1_ok, "p2": cv.p2_ok, "residual": cv.residual, "ok": cv.ok}
    sols = None
    if args.enumerate:
        sols = tb.enumerate_vertex_solutions(prob, limit=args.limit)
        data["solutions"] = [io.to_document(s) for s in sols]
        data["solution_count"] = len(sols)
    if args.format == "csv":
        rows = []
        for i, s in enumerate(sols or [m]):
            rows += [(i, lab, v) for lab, v in _focal_rows(s)]
        _csv(args, ["solution", "set", "mass"], rows)
        return
    _report(args, "total-belief", data)


def cmd_geometry(args) -> None:
    bel = _read_mass(args.file, args.strict)
    if args.action == "subspace":
        verts = geo.conditional_subspace(bel, args.rule)
        rows = [("".join(map(str, v.focus)) or "empty", *(float(c) for c in v.vector)) for v in verts]
        if args.format == "csv":
            _csv(args, ["focus", "c0", "c1", "c2"], rows)
        else:
            _report(args, "geometry-subspace", {"rule": args.rule, "vertices": [
                {"focus": [str(f) for f in v.focus], "vector": v.vector, "mass": io.to_document(v.mass)} for v in verts
            ]})
        return
    if not args.on:
        raise UsageError("geometry condition needs --on")
    out = geo.geometric_condition(bel, _event(bel.frame, args.on), args.norm)
    if args.format == "csv":
        _csv(args, ["set", "mass"], _focal_rows(out))
    else:
        _emit(args, out)


def cmd_maxent_train(args) -> None:
    samples = io.samples_from_csv(Path(args.data).read_text(encoding="utf-8"))
    fs = io.read_json(args.features, args.strict, kind="features")
    by_x = {str(v): v for v in fs.x_labels}
    by_c = {str(v): v for v in fs.classes}
    pairs = [(by_x.get(x, x), by_c.get(c, c)) for x, c in samples]
    prob = mx.MaxentProblem.from_feature_set(pairs, fs, args.entropy)
    res = mx.fit_maxent(prob)
    data = {
        "entropy_kind": args.entropy,
        "entropy": res.entropy,
        "kkt_residual": res.kkt.residual,
        "converged": res.converged,
        "iterations": res.iterations,
        "mass": io.to_document(res.mass),
        "pignistic": mx.pignistic(res.mass).reshape(len(fs.x_labels), len(fs.classes)),
    }
    if args.classical:
        cl = mx.classical_maxent(prob)
        joint = cl.joint(prob.p_hat.sum(axis=1))
        data["classical"] = {"lambdas": cl.lambdas, "joint": joint}
        data["total_variation"] = 0.5 * float(np.abs(mx.pignistic(res.mass) - joint.ravel()).sum())
    if args.format == "csv":
        p = mx.pignistic(res.mass)
        _csv(args, ["x", "class", "pignistic"], [
            (x, c, p[i * len(fs.classes) + k]) for i, x in enumerate(fs.x_labels) for k, c in enumerate(fs.classes)
        ])
        return
    _report(args, "maxent-train", data)


def cmd_limits(args) -> None:
    m = _read_mass(args.model, args.strict)
    rng = _rng(args)
    if args.mode == "lln":
        r = lim.lln_band_check(m, args.n, args.trials, args.eps, rng, args.true_label)
        data = {"n": r.n, "trials": r.trials, "eps": r.eps, "band": list(r.band), "coverage": r.coverage,
                "min_freq_mean": r.min_freq_mean, "max_freq_mean": r.max_freq_mean}
    else:
        r = lim.clt_check(m, args.n, args.trials, rng, true_label=args.true_label)
        if args.format == "csv":
            _csv(args, ["alpha", "upper", "lower"], zip(r.alpha.tolist(), r.upper_estimate.tolist(), r.lower_estimate.tolist()))
            return
        data = {"n": r.n, "samples": r.samples, "upper_distance": r.upper_distance,
                "lower_distance": r.lower_distance, "alpha": r.alpha,
                "upper_estimate": r.upper_estimate, "lower_estimate": r.lower_estimate}
    data["seed"] = args.seed
    _report(args, f"limits-{args.mode}", data)


def cmd_pac(args) -> None:
    if args.action == "bound":
        if args.h is None or args.delta is None or (args.n is None and args.epsilon is None):
            raise UsageError("pac bound needs --h, --delta and --n or --epsilon")
        data = {"h": args.h, "delta": args.delta}
        if args.n is not None:
            data["n"] = args.n
            data["epsilon"] = pac.risk_bound(args.h, args.n, args.delta)
        if args.epsilon is not None:
            data["sample_complexity"] = pac.sample_complexity(args.h, args.epsilon, args.delta)
            data.setdefault("epsilon", args.epsilon)
        _report(args, "pac-bound", data)
        return
    if not args.scenario:
        raise UsageError("pac simulate needs a scenario file")
    sc = io.read_json(args.scenario, args.strict, kind="pac-scenario")
    rng = _rng(args)
    n = sc.n if sc.n is not None else pac.sample_complexity(len(sc.hypotheses), sc.epsilon, sc.delta)
    if len(sc.distributions) == 1:
        r = pac.simulate_realizable(sc.hypotheses, sc.distributions[0], n, sc.epsilon, sc.delta, sc.trials, rng)
        data = {"n": n, "trials": r.trials, "violations": r.violations, "frequency": r.frequency,
                "delta": r.delta, "slack": r.slack, "passed": r.passed}
    else:
        ns = (n, 4 * n, 16 * n)
        r = pac.simulate_credal(sc.hypotheses, sc.distributions, ns, sc.epsilon, sc.trials, rng)
        data = {"n_values": list(r.n_values), "tails": list(r.tails), "realizable": r.realizable,
                "uniformly_realizable": r.uniformly_realizable, "min_worst_case_risk": r.min_worst_case_risk}
    data["seed"] = args.seed
    _report(args, "pac-simulate", data)


_SIZE_ARG = {
    "factorization": "trials",
    "conjecture": "instances",
    "bayesian-prior": "problems",
    "regression": "datasets",
    "geometry": "triples",
    "maxent": "pairs",
    "limits": "trials",
    "pac": "trials",
}


def cmd_verify(args) -> int:
    names = list(suites.SUITES) if args.suite == "all" else [args.suite]
    reports = {}
    for name in names:
        kwargs = {"seed": args.seed}
        if args.n is not None:
            if name not in ("factorization", "conjecture"):
                raise UsageError(f"--n is not used by suite {name!r}")
            kwargs["sizes"] = (args.n,)
        if args.trials is not None:
            if name not in _SIZE_ARG:
                raise UsageError(f"--trials is not used by suite {name!r}")
            kwargs[_SIZE_ARG[name]] = args.trials
        reports[name] = suites.SUITES[name](**kwargs)
    data = {k: r.as_dict(args.timing) for k, r in reports.items()}
    if args.format == "csv":
        rows = [(s, c, v["passed"], v["value"], v["limit"]) for s, r in data.items() for c, v in r["checks"].items()]
        _csv(args, ["suite", "check", "passed", "value", "limit"], rows)
    else:
        _report(args, "verify", data if len(data) > 1 else data[names[0]])
    return 0 if all(r.passed for r in reports.values()) else 1


# parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out", help="write output to this path instead of standard output")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--strict", action="store_true", help="reject unknown fields in input documents")

    p = _Parser(prog="beliefkit", description="Belief-function solvers and property checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("combine", parents=[common], help="combine mass functions")
    c.add_argument("--rule", choices=RULES, default="dempster")
    c.add_argument("files", nargs="+")
    c.set_defaults(func=cmd_combine)

    c = sub.add_parser("condition", parents=[common], help="Dempster conditioning")
    c.add_argument("--on", required=True, help="comma-separated labels of the event")
    c.add_argument("file")
    c.set_defaults(func=cmd_condition)

    c = sub.add_parser("likelihood", parents=[common], help="belief likelihood of a sharp sample")
    c.add_argument("--trials", required=True, help="CSV with an 'outcome' column")
    c.add_argument("--model", required=True)
    c.add_argument("--rule", choices=SUPPORTED_RULES, default="conjunctive")
    c.add_argument("--success", help="label counted as success for the CSV surface")
    c.add_argument("--grid", type=float, default=1e-2)
    c.set_defaults(func=cmd_likelihood)

    c = sub.add_parser("fit-logistic", parents=[common], help="generalized logistic regression")
    c.add_argument("data", help="CSV with columns x,y (y empty or NA when missing)")
    c.add_argument("--target", choices=(*reg.TARGETS, "both"), default="lower")
    c.set_defaults(func=cmd_fit_logistic)

    c = sub.add_parser("total-belief", parents=[common], help="total belief problem")
    c.add_argument("problem")
    c.add_argument("--enumerate", action="store_true", help="list vertex solutions")
    c.add_argument("--limit", type=int, default=1000)
    c.add_argument("--candidate", help="mass file to verify against the problem")
    c.set_defaults(func=cmd_total_belief)

    c = sub.add_parser("geometry", parents=[common], help="binary geometry and conditioning")
    c.add_argument("action", choices=("subspace", "condition"))
    c.add_argument("file")
    c.add_argument("--rule", choices=geo.SUBSPACE_RULES, default="dempster")
    c.add_argument("--on")
    c.add_argument("--norm", choices=("L1", "L2", "Linf"), default="L2")
    c.set_defaults(func=cmd_geometry)

    c = sub.add_parser("maxent-train", parents=[common], help="maximum entropy classifier")
    c.add_argument("data", help="CSV with columns x,class")
    c.add_argument("features")
    c.add_argument("--entropy", choices=mx.ENTROPY_KINDS, default="HBel")
    c.add_argument("--classical", action="store_true", help="also fit the log-linear baseline")
    c.set_defaults(func=cmd_maxent_train)

    c = sub.add_parser("limits", parents=[common], help="LLN band and CLT checks")
    c.add_argument("mode", choices=("lln", "clt"))
    c.add_argument("model")
    c.add_argument("--n", type=int, default=10_000)
    c.add_argument("--trials", type=int, default=1000)
    c.add_argument("--eps", type=float, default=0.02)
    c.add_argument("--true-label", dest="true_label")
    c.set_defaults(func=cmd_limits)

    c = sub.add_parser("pac", parents=[common], help="PAC bounds and simulation")
    c.add_argument("action", choices=("bound", "simulate"))
    c.add_argument("scenario", nargs="?")
    c.add_argument("--h", type=int)
    c.add_argument("--delta", type=float)
    c.add_argument("--n", type=int)
    c.add_argument("--epsilon", type=float)
    c.set_defaults(func=cmd_pac)

    c = sub.add_parser("verify", parents=[common], help="run a property suite")
    c.add_argument("--suite", choices=(*suites.SUITES, "all"), required=True)
    c.add_argument("--n", type=int, help="number of variables in the joint frame (factorization, conjecture)")
    c.add_argument("--trials", type=int, help="override the suite's sample size")
    c.add_argument("--timing", action="store_true", help="include wall-clock figures")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"beliefkit: error: {exc}\n")
        return 2
    except BeliefError as exc:
        sys.stderr.write(f"beliefkit: {type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"beliefkit: {exc}\n")
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
