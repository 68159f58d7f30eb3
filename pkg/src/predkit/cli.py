"""Command-line front end.

Exit codes: 0 Holds, 1 NotShown, 2 Nonconvergent, 3 no feasible
configuration, 64 usage error, 65 bad model or formula, 66 missing file.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .abstraction import PredicateSet, UnexpressibleAtom, abstract_property, abstract_system
from .checker import CheckLimits, check, default_max_iter, DEFAULT_WIDEN_AFTER
from .ctl import UnsupportedOperator
from .compat import augment, choose_preds_compat, compute_compatibility
from .model import (
    ModelError,
    ParseError,
    extract_candidate_predicates,
    load_model,
    parse_formula,
    parse_property,
    print_model,
    property_text,
)
from .report import RunReport, compat_matrix_json, file_sha256, render, trlimp_matrix_json
from .trlimp import NoFeasibleConfig, choose_preds_trlimp, comp_trans_level_imp

EX_USAGE, EX_DATAERR, EX_NOINPUT, EX_NOCONFIG = 64, 65, 66, 3

log = logging.getLogger("predkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _common(p, prop_required=False, n=True):
    p.add_argument("--model", required=True, help="model file")
    if n:
        p.add_argument("--n", type=int, default=None, help="number of process instances")
    p.add_argument("--prop", required=prop_required, help="ACTL property")
    p.add_argument("--max-iter", type=int, default=None,
                   help="fixpoint iteration cap (default: PREDKIT_MAX_ITER or 64)")
    p.add_argument("--widen-after", type=int, default=DEFAULT_WIDEN_AFTER,
                   help="widen from this iteration on; 0 disables widening")
    p.add_argument("--emit", help="write a JSON run report here")
    p.add_argument("--seed", type=int, default=0, help="reserved; all searches are deterministic")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="predkit", description="Partial predicate abstraction toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="check a property, optionally under an abstraction")
    _common(p, prop_required=True)
    p.add_argument("--preds", help="auto or a predicates file (one atom per line)")

    p = sub.add_parser("abstract", help="print the abstracted model")
    _common(p)
    p.add_argument("--preds", required=True)

    p = sub.add_parser("trlimp", help="transition-level imprecision scores")
    _common(p)
    p.add_argument("--preds", default="auto")
    p.add_argument("-k", type=int, default=2)
    p.add_argument("--no-scope-exclusion", action="store_true")

    p = sub.add_parser("compat", help="pairwise compatibility on a small instance")
    _common(p, prop_required=True, n=False)
    p.add_argument("--small-n", type=int, default=2)
    p.add_argument("--preds", default="auto")
    p.add_argument("-k", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("choose", help="select predicates and check the large instance")
    _common(p, prop_required=True)
    p.add_argument("--small-n", type=int, default=2)
    p.add_argument("--preds", default="auto")
    p.add_argument("-k", type=int, default=2)
    p.add_argument("--heuristic", choices=("trlimp", "compat"), default="compat")
    p.add_argument("--no-scope-exclusion", action="store_true")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("report", help="render a JSON run report")
    p.add_argument("file")
    return ap


# ---------------------------------------------------------------------------


def _limits(args) -> CheckLimits:
    mi = args.max_iter if args.max_iter is not None else default_max_iter()
    if mi < 1 or args.widen_after < 0:
        raise UsageError("--max-iter must be positive and --widen-after nonnegative")
    return CheckLimits(mi, args.widen_after)


def _load_preds(spec, ts, prop) -> PredicateSet:
    if spec in (None, "auto"):
        return extract_candidate_predicates(ts, prop)
    atoms = []
    with open(spec, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            f = parse_formula(line, ts)
            cubes = list(f.cubes)
            if len(cubes) != 1 or len(cubes[0]) != 1:
                raise ModelError(f"predicate {line!r} is not a single linear atom")
            atoms.append(next(iter(cubes[0])))
    return PredicateSet.of(atoms)


class _Run:
    def __init__(self, argv, args):
        self.args = args
        self.report = RunReport(command=list(argv))
        self.t0 = time.perf_counter()

    def phase(self, name):
        now = time.perf_counter()
        self.report.timings[name] = round(now - self.t0, 6)
        self.t0 = now

    def model(self, n):
        self.report.model_sha256 = file_sha256(self.args.model)
        ts = load_model(self.args.model, n)
        prop = parse_property(self.args.prop, ts) if self.args.prop else None
        return ts, prop

    def finish(self):
        if getattr(self.args, "emit", None):
            with open(self.args.emit, "w", encoding="utf-8") as fh:
                fh.write(self.report.to_json())


def _abstract_check(ts, prop, ps, limits):
    """Check ``prop`` on ``ts`` abstracted by ``ps``; property atoms over
    the abstracted variables are added when the property needs them."""
    try:
        aprop = abstract_property(prop, ps, ts)
    except UnexpressibleAtom:
        ps = PredicateSet.of(augment([p.atom for p in ps], prop))
        aprop = abstract_property(prop, ps, ts)
    return check(abstract_system(ts, ps), aprop, limits), ps


def cmd_check(run: _Run) -> int:
    a = run.args
    ts, prop = run.model(a.n)
    limits = _limits(a)
    run.phase("parse")
    if a.preds:
        ps = _load_preds(a.preds, ts, prop)
        run.report.predicates = [str(p.atom) for p in ps]
        aprop = abstract_property(prop, ps, ts)
        ats = abstract_system(ts, ps)
        run.phase("abstract")
        v = check(ats, aprop, limits)
    else:
        v = check(ts, prop, limits)
    run.phase("check")
    run.report.verdicts["check"] = str(v)
    print(v)
    return v.exit_code


def cmd_abstract(run: _Run) -> int:
    a = run.args
    ts, prop = run.model(a.n)
    ps = _load_preds(a.preds, ts, prop)
    run.report.predicates = [str(p.atom) for p in ps]
    ats = abstract_system(ts, ps)
    run.phase("abstract")
    for p in ps:
        print(f"# {p.bool_var} <-> {ts.describe_atom(p.atom)}")
    sys.stdout.write(print_model(ats))
    if prop is not None:
        print(f"# property: {property_text(abstract_property(prop, ps, ts), ats)}")
    return 0


def _trlimp(run, ts, ps, k, no_excl):
    scores = comp_trans_level_imp(ts, ps)
    run.phase("scores")
    run.report.matrices["trlimp"] = trlimp_matrix_json(scores)
    cfg = choose_preds_trlimp(ps, scores, k, scope_exclusion=not no_excl)
    run.phase("search")
    return cfg


def _compat(run, ts, ps, prop, k, limits, jobs):
    m = compute_compatibility(ts, ps, prop, limits, jobs=jobs)
    run.phase("compat")
    run.report.matrices["compat"] = compat_matrix_json(m)
    cfg = choose_preds_compat(ps, m, k)
    run.phase("search")
    return cfg


def _print_config(cfg):
    print(f"chosen: {{{', '.join(str(p.atom) for p in cfg.preds)}}} "
          f"vars={cfg.num_vars} score={cfg.score}")


def cmd_trlimp(run: _Run) -> int:
    a = run.args
    ts, prop = run.model(a.n)
    ps = _load_preds(a.preds, ts, prop)
    run.report.predicates = [str(p.atom) for p in ps]
    run.phase("parse")
    cfg = _trlimp(run, ts, ps, a.k, a.no_scope_exclusion)
    run.report.config = cfg.to_json()
    sys.stdout.write(render(run.report))
    return 0


def cmd_compat(run: _Run) -> int:
    a = run.args
    ts, prop = run.model(a.small_n)
    ps = _load_preds(a.preds, ts, prop)
    run.report.predicates = [str(p.atom) for p in ps]
    run.phase("parse")
    cfg = _compat(run, ts, ps, prop, a.k, _limits(a), a.jobs)
    run.report.config = cfg.to_json()
    sys.stdout.write(render(run.report))
    return 0


def cmd_choose(run: _Run) -> int:
    a = run.args
    limits = _limits(a)
    small, prop_small = run.model(a.small_n)
    ps = _load_preds(a.preds, small, prop_small)
    run.report.predicates = [str(p.atom) for p in ps]
    run.phase("parse")
    if a.heuristic == "trlimp":
        cfg = _trlimp(run, small, ps, a.k, a.no_scope_exclusion)
    else:
        cfg = _compat(run, small, ps, prop_small, a.k, limits, a.jobs)
    run.report.config = cfg.to_json()
    _print_config(cfg)
    large, prop = run.model(a.n)
    v, used = _abstract_check(large, prop, cfg.predicate_set(), limits)
    run.phase("check")
    run.report.config["checked_preds"] = [str(p.atom) for p in used]
    run.report.verdicts["large"] = str(v)
    print(f"large instance: {v}")
    return v.exit_code


def cmd_report(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        rep = RunReport.from_json(fh.read())
    sys.stdout.write(render(rep))
    return 0


COMMANDS = {
    "check": cmd_check,
    "abstract": cmd_abstract,
    "trlimp": cmd_trlimp,
    "compat": cmd_compat,
    "choose": cmd_choose,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if args.cmd == "report":
        try:
            return cmd_report(args)
        except OSError as e:
            print(f"predkit: {e}", file=sys.stderr)
            return EX_NOINPUT
        except (ValueError, TypeError) as e:
            print(f"predkit: bad report: {e}", file=sys.stderr)
            return EX_DATAERR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    r = _Run(argv, args)
    try:
        for flag in ("n", "small_n", "k", "jobs"):
            val = getattr(args, flag, None)
            if val is not None and val < 1:
                raise UsageError(f"--{flag.replace('_', '-')} must be at least 1")
        code = COMMANDS[args.cmd](r)
    except UsageError as e:
        print(f"predkit: {e}", file=sys.stderr)
        return EX_USAGE
    except OSError as e:
        print(f"predkit: {e}", file=sys.stderr)
        return EX_NOINPUT
    except (ParseError, ModelError, UnexpressibleAtom, UnsupportedOperator) as e:
        print(f"predkit: {e}", file=sys.stderr)
        return EX_DATAERR
    except NoFeasibleConfig as e:
        print(f"predkit: {e}", file=sys.stderr)
        r.finish()
        return EX_NOCONFIG
    r.finish()
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
