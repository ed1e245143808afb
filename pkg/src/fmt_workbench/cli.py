"""Command-line front end.

Exit codes: 0 pass/true, 1 semantic failure, 2 input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from typing import List, Optional, Sequence

from . import counterexample as cx
from . import textio
from .errors import BudgetExceeded, WorkbenchError
from .families import all_graphs, all_structures
from .games import (
    DUPLICATOR,
    GameConfig,
    certificate_records,
    check_family_certificate,
    default_budget,
    outcome_from_records,
    solve_family_game,
    transfer_separation_report,
)
from .logic import evaluate, parse, render, vocabulary_of
from .logic.syntax import Formula
from .preservation import (
    check_duality,
    dominating_set_sentence,
    find_k_cruxes,
    is_crux,
    is_hereditary_over,
    is_hereditary_over_lattice,
    is_k_ary_cover,
)
from .reports import format_tuple, parse_kv, parse_tuple, to_kv, to_text
from .structures import Structure, Vocabulary, enumerate_substructures, induced_substructure

log = logging.getLogger("fmt_workbench")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

_LATTICE = re.compile(r"^A(\d+),?(\d+)-lattice$")


class UsageError(WorkbenchError):
    pass


# -- helpers ------------------------------------------------------------------------


def _emit(args, title: str, records) -> None:
    if args.format == "kv":
        sys.stdout.write(to_kv(records))
    else:
        sys.stdout.write(to_text(title, records))


def _budget(args) -> int:
    return args.budget if args.budget is not None else default_budget()


def named_formula(name: str, k: Optional[int]) -> Optional[Formula]:
    """Built-in sentences: ``phi``, ``phi-prenex``, ``xi1``..``xi5``, ``domset<k>``."""
    def need_k():
        if k is None:
            raise UsageError(f"{name} needs --k")
        return k

    if name == "phi":
        return cx.phi(need_k())
    if name == "phi-prenex":
        return cx.phi_prenex(need_k())
    m = re.fullmatch(r"xi([1-5])", name)
    if m:
        return cx.xi(int(m.group(1)), need_k() if m.group(1) == "5" else (k or 0))
    m = re.fullmatch(r"domset(\d*)", name)
    if m:
        return dominating_set_sentence(int(m.group(1)) if m.group(1) else need_k())
    return None


def resolve_formula(text: str, k: Optional[int], vocab: Optional[Vocabulary]) -> Formula:
    f = named_formula(text.strip(), k)
    if f is not None:
        return f
    return parse(text, vocab)


def parse_vocab_option(text: Optional[str]) -> Optional[Vocabulary]:
    """``"E/2 P/1 ; c d"`` -> Vocabulary."""
    if not text:
        return None
    rel_part, _, const_part = text.partition(";")
    rels = []
    for item in rel_part.split():
        name, _, arity = item.partition("/")
        if not arity.isdigit():
            raise UsageError(f"bad relation {item!r}, expected NAME/ARITY")
        rels.append((name, int(arity)))
    return Vocabulary(tuple(rels), tuple(const_part.split()))


def resolve_family(args, f: Formula) -> List[Structure]:
    kind = args.family
    if kind is None:
        if not args.structure:
            raise UsageError("give --family or --structure")
        return [textio.load(p) for p in args.structure]
    m = _LATTICE.match(kind)
    if m:
        return list(enumerate_substructures(cx.build_A(int(m.group(1)), int(m.group(2)))))
    if kind == "lattice":
        if not args.structure:
            raise UsageError("--family lattice needs --structure")
        return [s for p in args.structure for s in enumerate_substructures(textio.load(p))]
    if args.max_size is None:
        raise UsageError(f"--family {kind} needs --max-size")
    if kind == "graphs":
        return [g for m in range(1, args.max_size + 1) for g in all_graphs(m)]
    if kind == "all":
        vocab = parse_vocab_option(args.vocab) or vocabulary_of(f)
        return list(all_structures(vocab, args.max_size))
    raise UsageError(f"unknown family {kind!r}")


def _lattice_host(args) -> Optional[Structure]:
    if args.family is None:
        return None
    m = _LATTICE.match(args.family)
    if m:
        return cx.build_A(int(m.group(1)), int(m.group(2)))
    if args.family == "lattice" and args.structure and len(args.structure) == 1:
        return textio.load(args.structure[0])
    return None


def _struct_records(prefix: str, S: Structure):
    return [(prefix, textio.dumps(S).rstrip("\n"))]


def _formula_vocab(args) -> Optional[Vocabulary]:
    return parse_vocab_option(getattr(args, "vocab", None))


# -- commands -----------------------------------------------------------------------


def cmd_eval(args) -> int:
    S = textio.load(args.structure)
    f = resolve_formula(args.formula, args.k, S.vocab)
    value = evaluate(S, f)
    if args.format == "kv":
        _emit(args, "eval", [("command", "eval"), ("formula", render(f)), ("result", value)])
    else:
        print("true" if value else "false")
    return EXIT_OK


def cmd_counterexample(args) -> int:
    mode = "sample" if args.sample is not None else "exhaustive"
    if mode == "sample" and args.seed is None:
        raise UsageError("--sample needs --seed")
    report = cx.verify_counterexample(
        args.n,
        args.k,
        mode=mode,
        count=args.sample or 0,
        seed=args.seed,
        budget=_budget(args),
        literal_check=not args.skip_literal,
        jobs=args.jobs,
    )
    records = report.records()
    if args.export_structures:
        os.makedirs(args.export_structures, exist_ok=True)
        paths = [os.path.join(args.export_structures, f"A_n{args.n}_k{args.k}.struct")]
        textio.dump(cx.build_A(args.n, args.k), paths[0])
        for i in range(args.k + 1):
            p = os.path.join(args.export_structures, f"B_n{args.n}_k{args.k}_i{i}.struct")
            textio.dump(cx.build_B(args.n, args.k, i), p)
            paths.append(p)
        records.append(("exported", " ".join(os.path.basename(p) for p in paths)))
    if args.figures:
        from .plotting import render_counterexample_figures

        paths = render_counterexample_figures(report, args.figures)
        records.append(("figures", " ".join(os.path.basename(p) for p in paths)))
    _emit(args, f"counterexample n={args.n} k={args.k}", records)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_game(args) -> int:
    A = textio.load(args.a)
    Bs = [textio.load(p) for p in args.b]
    cfg = GameConfig(args.k, args.n, _budget(args))
    outcome = solve_family_game(A, Bs, cfg, table_limit=args.table_limit)
    rows = [("command", "game"), ("targets", len(Bs))]
    cert = certificate_records(outcome)
    if args.certificate:
        rows += cert
    else:
        rows += [r for r in cert if not r[0].startswith("cert.")]
        if outcome.winner != DUPLICATOR and outcome.spoiler_a is not None:
            rows.append(("cert.spoiler_a", format_tuple(outcome.spoiler_a)))
    rows.append(("certificate_ok", check_family_certificate(A, Bs, cfg, outcome)
                 if outcome.has_certificate else "n/a"))
    _emit(args, "game", rows)
    return EXIT_OK if outcome.winner == DUPLICATOR else EXIT_FAIL


def cmd_check_certificate(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        records = parse_kv(fh.read())
    outcome = outcome_from_records(records)
    if not outcome.has_certificate:
        raise UsageError("the report carries no certificate (re-run game with --certificate)")
    A = textio.load(args.a)
    Bs = [textio.load(p) for p in args.b]
    ok = check_family_certificate(A, Bs, GameConfig(outcome.k, outcome.n), outcome)
    _emit(args, "check-certificate", [("command", "check-certificate"),
                                      ("winner", outcome.winner), ("certificate_ok", ok)])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_transfer(args) -> int:
    report = transfer_separation_report(args.n, args.k, budget=_budget(args))
    _emit(args, f"transfer n={args.n} k={args.k}", report.records())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_build(args) -> int:
    if args.which == "A":
        S = cx.build_A(args.n, args.k)
    elif args.which == "B":
        if args.istar is None:
            raise UsageError("build B needs --istar")
        S = cx.build_B(args.n, args.k, args.istar)
    else:
        from .families import star_graph

        S = star_graph(args.leaves)
    text = textio.dumps(S)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_preserve(args) -> int:
    what = args.what
    if what == "cover":
        return _preserve_cover(args)
    vocab = _formula_vocab(args)
    if vocab is None and args.structure and what != "duality":
        vocab = textio.load(args.structure[0]).vocab
    f = resolve_formula(args.formula, args.k, vocab)
    rows = [("command", f"preserve {what}"), ("formula", render(f))]

    if what == "crux":
        if not args.structure or len(args.structure) != 1:
            raise UsageError("crux needs exactly one --structure")
        if args.k is None:
            raise UsageError("crux needs --k")
        S = textio.load(args.structure[0])
        if args.candidate is not None:
            C = parse_tuple(args.candidate)
            ok = is_crux(S, C, f, args.k)
            rows += [("k", args.k), ("candidate", format_tuple(C)), ("is_crux", ok)]
            _emit(args, "preserve crux", rows)
            return EXIT_OK if ok else EXIT_FAIL
        report = find_k_cruxes(S, f, args.k)
        rows += [("k", args.k), ("crux_count", len(report.cruxes))]
        rows += [(f"crux.{j}", "{" + format_tuple(sorted(c)) + "}") for j, c in enumerate(report.cruxes)]
        _emit(args, "preserve crux", rows)
        return EXIT_OK if report.cruxes else EXIT_FAIL

    if what == "hereditary":
        host = _lattice_host(args)
        if host is not None:
            verdict = is_hereditary_over_lattice(f, host)
        else:
            verdict = is_hereditary_over(f, resolve_family(args, f))
    elif what == "duality":
        if args.k is None:
            raise UsageError("duality needs --k")
        family = resolve_family(args, f)
        verdict = check_duality(f, family, args.k)
        rows += [("k", args.k), ("family_size", len(family))]
    else:
        raise UsageError(f"unknown preserve check {what!r}")
    rows += [("holds", verdict.holds), ("checked", verdict.checked)]
    if verdict.detail:
        rows.append(("detail", verdict.detail))
    if what == "hereditary" and not verdict.holds:
        sup, sub = verdict.counterexample
        rows += _struct_records("counterexample.model", sup)
        rows.append(("counterexample.subset", format_tuple(sub.elements)))
    if what == "duality" and not verdict.holds:
        here, ext = verdict.counterexample
        for label, v in (("hereditary", here), ("extension_closed", ext)):
            if v.counterexample:
                rows += _struct_records(f"counterexample.{label}", v.counterexample[0])
    _emit(args, f"preserve {what}", rows)
    return EXIT_OK if verdict.holds else EXIT_FAIL


def _preserve_cover(args) -> int:
    if not args.structure or len(args.structure) != 1:
        raise UsageError("cover needs exactly one --structure (the host)")
    if args.k is None:
        raise UsageError("cover needs --k")
    if not args.member:
        raise UsageError("cover needs at least one --member")
    host = textio.load(args.structure[0])
    members = [induced_substructure(host, parse_tuple(m)) for m in args.member]
    ok = is_k_ary_cover(host, members, args.k)
    rows = [("command", "preserve cover"), ("k", args.k), ("members", len(members)), ("is_cover", ok)]
    _emit(args, "preserve cover", rows)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "kv"), default="text",
                        help="human-readable text or key/value report")
    common.add_argument("--budget", type=int, default=None,
                        help="position/pair limit (default: $FMT_WORKBENCH_BUDGET or 1e8)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fmt-workbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate a sentence on a structure file")
    e.add_argument("structure")
    e.add_argument("formula", help="formula text or a built-in name")
    e.add_argument("--k", type=int, default=None)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("counterexample", parents=[common],
                       help="verify the A/B construction and its duplicator strategy")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    mode = c.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--sample", type=int, metavar="COUNT")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--export-structures", metavar="DIR")
    c.add_argument("--figures", metavar="DIR", help="write PNG figures to DIR")
    c.add_argument("--skip-literal", action="store_true",
                   help="skip the comparison run of the unsound literal relocation")
    c.set_defaults(func=cmd_counterexample)

    g = sub.add_parser("game", parents=[common], help="solve the prefix game A vs B")
    g.add_argument("a")
    g.add_argument("b", nargs="+", help="one target, or several for the family game")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--certificate", action="store_true", help="print the full certificate")
    g.add_argument("--table-limit", type=int, default=100_000)
    g.set_defaults(func=cmd_game)

    cc = sub.add_parser("check-certificate", parents=[common],
                        help="re-verify a game report produced with --certificate --format kv")
    cc.add_argument("report")
    cc.add_argument("a")
    cc.add_argument("b", nargs="+")
    cc.set_defaults(func=cmd_check_certificate)

    t = sub.add_parser("transfer", parents=[common],
                       help="game and separation evidence for the construction")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--k", type=int, required=True)
    t.set_defaults(func=cmd_transfer)

    b = sub.add_parser("build", parents=[common], help="write a built-in structure")
    b.add_argument("which", choices=("A", "B", "star"))
    b.add_argument("--n", type=int, default=1)
    b.add_argument("--k", type=int, default=1)
    b.add_argument("--istar", type=int, default=None)
    b.add_argument("--leaves", type=int, default=3)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    pr = sub.add_parser("preserve", parents=[common], help="preservation checks")
    pr.add_argument("what", choices=("hereditary", "crux", "cover", "duality"))
    pr.add_argument("--formula", default=None)
    pr.add_argument("--k", type=int, default=None)
    pr.add_argument("--family", default=None,
                    help="A<n><k>-lattice, lattice, all, or graphs")
    pr.add_argument("--max-size", type=int, default=None)
    pr.add_argument("--vocab", default=None, help='e.g. "E/2 P/1 ; c"')
    pr.add_argument("--structure", action="append", default=None)
    pr.add_argument("--candidate", default=None, help="comma-separated elements")
    pr.add_argument("--member", action="append", default=None,
                    help="comma-separated subset of the host (repeatable)")
    pr.set_defaults(func=cmd_preserve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "preserve" and args.what != "cover" and not args.formula:
        print("error: --formula is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (WorkbenchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
