"""Batch command-line front end.

Results go to standard output as JSON (or CSV for experiment tables with
``--format csv``); short human summaries go to standard error.

Exit codes: 0 success, 1 a requested check failed, 2 unreadable input,
3 an input violates an axiom (or an oracle cross-check disagrees),
4 the exact-solver budget was exceeded.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import gh, io, metric, relations as rel, sampling, topology as top

__all__ = ["main", "run", "EXPERIMENTS"]

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_INVARIANT, EXIT_BUDGET = 0, 1, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _family(tag: str) -> rel.FamilyFilter:
    # metric inputs carry their (discrete) metric topology
    return rel.ALL if tag == "all" else top.semicontinuity_filter(tag)


def cmd_validate(args) -> tuple[int, object]:
    try:
        X = io.load_space(args.space)
    except metric.MetricAxiomError as exc:
        report = {"valid": False,
                  "violations": [{"axiom": v.axiom, "witness": list(v.witness), "detail": v.detail}
                                 for v in exc.violations]}
        for v in exc.violations:
            _note(f"violated {v}")
        return EXIT_INVARIANT, report
    _note(f"valid {X.n}-point metric space, diameter {metric.diameter(X):g}")
    return EXIT_OK, {"valid": True, "points": X.n, "labels": list(X.labels),
                     "diameter": metric.diameter(X)}


def cmd_hausdorff(args) -> tuple[int, object]:
    X = io.load_space(args.space)
    A, B = io.load_subset(args.a, X), io.load_subset(args.b, X)
    value = metric.hausdorff(A, B)
    forward = max(metric.point_set_distance(a, B) for a in A)
    backward = max(metric.point_set_distance(b, A) for b in B)
    _note(f"d_H = {value:g}")
    return EXIT_OK, {"hausdorff": value, "directed": [forward, backward],
                     "a": list(A.members), "b": list(B.members)}


def cmd_gh(args) -> tuple[int, object]:
    X, Y = io.load_space(args.x), io.load_space(args.y)
    family = _family(args.family)
    res = gh.gh_exact(X, Y, family, args.budget)
    out = res.to_json()
    code = EXIT_OK
    if not res.is_exact:
        _note(f"budget exceeded: {X.n}x{Y.n} cells > {args.budget or gh.default_budget()}; "
              f"reporting bounds [{res.lower:g}, {res.upper:g}]")
        code = EXIT_BUDGET
    if args.oracle:
        if X.n * Y.n > gh.ORACLE_MAX_CELLS:
            raise _Exit(EXIT_BUDGET, f"oracle needs |X|*|Y| <= {gh.ORACLE_MAX_CELLS}")
        oracle = gh.gh_oracle(X, Y, family)
        out["oracle"] = oracle.value
        if res.is_exact and oracle.value != res.value:
            _note(f"oracle disagrees: {oracle.value} != {res.value}")
            code = EXIT_INVARIANT
    if res.is_exact:
        _note(f"d_GH[{res.family}] = {res.value:g} (exact)")
    return code, out


def cmd_dis(args) -> tuple[int, object]:
    X, Y = io.load_space(args.x), io.load_space(args.y)
    sigma = io.load_relation(args.relation, X, Y)
    d = rel.distortion(sigma)
    _note(f"dis = {d:g}")
    return EXIT_OK, {"distortion": d, "correspondence": sigma.is_correspondence,
                     "isometry": rel.is_isometry_graph(sigma)}


def cmd_classify(args) -> tuple[int, object]:
    tx, ty = io.load_topology(args.top_x), io.load_topology(args.top_y)
    data = io.read_json(args.relation)
    try:
        inc = np.zeros((data["rows"], data["cols"]), dtype=bool)
        for i, j in data["cells"]:
            inc[i, j] = True
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise io.ParseError(f"{args.relation}: {exc}") from exc
    if inc.shape != (tx.n, ty.n):
        raise io.ParseError(f"relation is {inc.shape}, topologies have {tx.n} and {ty.n} points")
    if not (inc.any(axis=1).all() and inc.any(axis=0).all()):
        raise _Exit(EXIT_INVARIANT, "relation is not a correspondence")
    fams = [t for t in top.FAMILY_TAGS if t in top.classify_correspondence(inc, tx, ty)]
    _note("families: " + ", ".join(fams))
    return EXIT_OK, {"families": fams, "open": top.is_open_relation(inc, tx, ty),
                     "closed": top.is_closed_relation(inc, tx, ty)}


def cmd_semicont(args) -> tuple[int, object]:
    tx, ty = io.load_topology(args.top_x), io.load_topology(args.top_y)
    f = io.load_map(args.map, tx, ty)
    lower, upper = top.is_lower_semicontinuous(f), top.is_upper_semicontinuous(f)
    _note(f"lower={lower.holds} upper={upper.holds}")
    return EXIT_OK, {"lower": lower.holds, "upper": upper.holds,
                     "continuous": lower.holds and upper.holds,
                     "lower_witness": lower.witness, "upper_witness": upper.witness}


def _exp_dense_interval(args):
    return sampling.dense_subnet_experiment(sampling.NetSpec("interval", 1.0, points=9), [8, 4, 2, 1],
                                            budget=args.budget)


def _exp_dense_circle(args):
    return sampling.dense_subnet_experiment(sampling.NetSpec("circle", 2 * math.pi, points=8),
                                            [8, 4, 2, 1], budget=args.budget)


def _exp_delta1_circle(args):
    return sampling.delta1_convergence(sampling.NetSpec("circle", 2 * math.pi, points=2),
                                       [2, 4, 8, 16, 32, 64])


def _exp_delta1_interval(args):
    return sampling.delta1_convergence(sampling.NetSpec("interval", 1.0, points=2), [2, 3, 5, 9, 17, 33])


def _exp_epsilon_limit(args):
    rng = np.random.default_rng(args.seed)
    X = sampling.generate_net(sampling.NetSpec("circle", 2 * math.pi, points=6))
    inc = rng.random((6, 6)) < 0.3
    inc[np.arange(6), rng.integers(6, size=6)] = True
    inc[rng.integers(6, size=6), np.arange(6)] = True
    schedule = args.eps or [4.0, 2.0, 1.5, 1.0, 0.5, 0.25, 0.125]
    return sampling.epsilon_limit_experiment(rel.Correspondence(X, X, inc), schedule)


def _exp_extension(args):
    rng = np.random.default_rng(args.seed)
    target = metric.random_space(4, rng)
    table = sampling.ExperimentTable("extension", ("level", "points", "delta", "coarse_dis",
                                                   "fine_dis", "bound_ok", "restriction_ok"))
    coarse = sampling.generate_net(sampling.NetSpec("interval", 1.0, points=3))
    inc = rng.random((coarse.n, target.n)) < 0.4
    inc[np.arange(coarse.n), rng.integers(target.n, size=coarse.n)] = True
    inc[rng.integers(coarse.n, size=target.n), np.arange(target.n)] = True
    R = rel.Correspondence(coarse, target, inc)
    for n in (3, 5, 9, 17):
        fine = sampling.generate_net(sampling.NetSpec("interval", 1.0, points=n))
        ext = sampling.extend_correspondence(R, fine)
        delta = sampling.extension_gap(coarse, fine)
        emb = [fine.labels.index(lab) for lab in coarse.labels]
        table.rows.append({"level": n, "points": n, "delta": delta, "coarse_dis": rel.distortion(R),
                           "fine_dis": rel.distortion(ext),
                           "bound_ok": rel.distortion(ext) <= rel.distortion(R) + 2 * delta + 1e-9,
                           "restriction_ok": bool(np.array_equal(ext.incidence[emb], R.incidence))})
    table.checks["bound"] = all(table.column("bound_ok"))
    table.checks["restriction"] = all(table.column("restriction_ok"))
    return table


EXPERIMENTS = {
    "dense-interval": _exp_dense_interval,
    "dense-circle": _exp_dense_circle,
    "delta1-circle": _exp_delta1_circle,
    "delta1-interval": _exp_delta1_interval,
    "epsilon-limit": _exp_epsilon_limit,
    "extension": _exp_extension,
}


def cmd_experiment(args) -> tuple[int, object]:
    table = EXPERIMENTS[args.name](args)
    for name, ok in table.checks.items():
        _note(f"{'PASS' if ok else 'FAIL'} {name}")
    code = EXIT_OK if table.passed else EXIT_FAILED
    if args.format == "csv":
        return code, table.to_csv()
    return code, table.to_json()


def cmd_suite(args) -> tuple[int, object]:
    from .suite import run_suite

    results = run_suite(args.seed, args.only)
    for r in results:
        _note(r.line())
    out = [{"module": r.module, "property": r.name, "passed": r.passed, "detail": r.detail}
           for r in results]
    if args.format == "csv":
        lines = ["module,property,passed"] + [f"{r.module},{r.name},{r.passed}" for r in results]
        out = "\n".join(lines) + "\n"
    return (EXIT_OK if all(r.passed for r in results) else EXIT_FAILED), out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghlab", description=__doc__.splitlines()[0])
    p.add_argument("--output", "-o", help="write the result here instead of standard output")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None,
                   help="exact-solver cell budget (default: $GHLAB_BUDGET or 64)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check the metric axioms of a distance matrix")
    s.add_argument("space")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("hausdorff", help="Hausdorff distance between two subsets of one space")
    s.add_argument("space")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_hausdorff)

    s = sub.add_parser("gh", help="exact Gromov-Hausdorff distance with certificate")
    s.add_argument("x")
    s.add_argument("y")
    s.add_argument("--family", choices=top.FAMILY_TAGS, default="all")
    s.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    s.set_defaults(func=cmd_gh)

    s = sub.add_parser("dis", help="distortion of a relation between two spaces")
    s.add_argument("relation")
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=cmd_dis)

    s = sub.add_parser("classify", help="semicontinuity families of a correspondence")
    s.add_argument("relation")
    s.add_argument("top_x")
    s.add_argument("top_y")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("semicont", help="semicontinuity of a set-valued map")
    s.add_argument("map")
    s.add_argument("top_x")
    s.add_argument("top_y")
    s.set_defaults(func=cmd_semicont)

    s = sub.add_parser("experiment", help="run a named net experiment")
    s.add_argument("name", choices=sorted(EXPERIMENTS))
    s.add_argument("--eps", type=float, nargs="+", help="epsilon schedule for epsilon-limit")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("suite", help="run the full property suite")
    s.add_argument("--only", help="run checks whose name contains this string")
    s.set_defaults(func=cmd_suite)
    return p


def run(argv: list[str]) -> tuple[int, str]:
    """Execute one command; return ``(exit_code, stdout_text)``."""
    parser = build_parser()
    args = parser.parse_args(_hoist_globals(argv))
    try:
        code, payload = args.func(args)
    except _Exit as exc:
        _note(f"error: {exc}")
        return exc.code, ""
    except metric.MetricAxiomError as exc:
        _note(f"metric axiom violated: {exc}")
        return EXIT_INVARIANT, ""
    except io.InvariantViolation as exc:
        _note(f"invariant violated: {exc}")
        return EXIT_INVARIANT, ""
    except io.ParseError as exc:
        _note(f"cannot parse input: {exc}")
        return EXIT_PARSE, ""
    text = payload if isinstance(payload, str) else io.dump_json(payload) + "\n"
    return code, text


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    # global options may follow the subcommand too
    code, text = run(argv)
    args = build_parser().parse_known_args(_hoist_globals(argv))[0]
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


_GLOBALS = {"--output": True, "-o": True, "--format": True, "--seed": True, "--budget": True}


def _hoist_globals(argv: list[str]) -> list[str]:
    front, rest = [], []
    k = 0
    while k < len(argv):
        tok = argv[k]
        name = tok.split("=", 1)[0]
        if name in _GLOBALS:
            if "=" in tok:
                front.append(tok)
            else:
                front.extend(argv[k:k + 2])
                k += 1
        else:
            rest.append(tok)
        k += 1
    return front + rest


if __name__ == "__main__":
    sys.exit(main())
