"""``wcl`` command-line front end.

Exit codes: 0 success, 2 rejection or failed check (with a machine-readable
reason on stdout), 1 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .analysis import attempt_extension, decompose_dp, recover_bijective_dp, recover_isometry
from .config import RunConfig
from .errors import WclError
from .funcspace import probe_corpus
from .gallery import NAMES, run_gallery
from .operator import (
    Symbol,
    build_weighted_composition,
    check_disjointness_preserving,
    check_injection,
    check_isometry,
    check_proper,
)
from .serialize import load_operator, load_space, operator_to_dict, read_json, write_json

log = logging.getLogger("wcl")

EXIT_OK, EXIT_IO, EXIT_REJECT = 0, 1, 2


class InputError(Exception):
    """Unreadable or malformed input file."""


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not rejections
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _setup_logging():
    level = os.environ.get("WCL_LOG", "off").lower()
    table = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=table.get(level, logging.CRITICAL + 1), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _load(fn, path):
    try:
        return fn(path)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"{path}: {e}") from None
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, WclError):
            raise
        raise InputError(f"{path}: malformed document ({e!r})") from None


def _config(args):
    doc = _load(read_json, args.config) if args.config else {}
    try:
        cfg = RunConfig.from_dict(doc)
    except (WclError, TypeError) as e:
        raise InputError(f"{args.config}: {e}") from None
    if args.seed is not None:
        cfg.corpus.seed = args.seed
    return cfg


def _emit(doc, args):
    write_json(doc, args.out)


def _reject(err):
    doc = {"verdict": "rejected", **err.to_dict()}
    return doc


def cmd_build(args, cfg):
    tol = cfg.tolerance.c0()
    X = _load(load_space, args.domain)
    Y = _load(load_space, args.codomain)
    sym = _load(lambda p: Symbol.from_dict(read_json(p)), args.symbol)
    corpus = probe_corpus(X, tol, cfg.corpus.seed, n_random=cfg.corpus.size // 2)
    try:
        T = build_weighted_composition(X, Y, sym, tol, lipschitz=cfg.tolerance.lipschitz,
                                       corpus=corpus)
    except WclError as e:
        _emit(_reject(e), args)
        return EXIT_REJECT
    doc = operator_to_dict(T)
    doc["validation"] = {"verdict": "accepted", "proper": check_proper(sym, X, Y).passed}
    _emit(doc, args)
    return EXIT_OK


CHECKS = {
    "proper": lambda T, cfg: check_proper(T.symbol if hasattr(T, "symbol") else _need_wc(),
                                          T.domain, T.codomain),
    "isometry": lambda T, cfg: check_isometry(T, cfg.tolerance.c0()),
    "dp": lambda T, cfg: check_disjointness_preserving(T, cfg.tolerance.c0()),
    "injection": lambda T, cfg: check_injection(T, cfg.tolerance.c0(),
                                                lipschitz=cfg.tolerance.lipschitz),
}


def _need_wc():
    raise WclError("the properness check needs a symbol-backed operator")


def cmd_check(args, cfg):
    T = _load(load_operator, args.operator)
    rep = CHECKS[args.kind](T, cfg)
    _emit(rep.to_dict(), args)
    return EXIT_OK if rep.passed else EXIT_REJECT


def cmd_recover(args, cfg):
    tol = cfg.tolerance.c0()
    ops = [_load(load_operator, p) for p in args.operators]
    mode = args.mode or "isometry"
    if mode == "isometry":
        doc = recover_isometry(ops[-1], tol, tier=cfg.tolerance.tier,
                               seed=cfg.corpus.seed).to_dict()
    elif mode == "dp":
        doc = decompose_dp(ops, tol, thresholds=cfg.tolerance.thresholds(),
                           tier=cfg.tolerance.tier, seed=cfg.corpus.seed).to_dict()
    elif mode == "bijective":
        doc = recover_bijective_dp(ops[-1], tol).to_dict()
    else:
        raise InputError(f"unknown recover mode {mode!r}")
    _emit(doc, args)
    return EXIT_OK


def cmd_extend(args, cfg):
    T = _load(load_operator, args.operator)
    mode = {"isometry": "isometric"}.get(args.mode, args.mode) or "dp"
    rep = attempt_extension(T, mode, cfg.tolerance.c0())
    _emit(rep.to_dict(), args)
    return EXIT_OK


def cmd_gallery(args, cfg):
    out = args.out or "gallery"
    written = run_gallery(args.name, out, cfg)
    sys.stdout.write("\n".join(written) + "\n")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="wcl", description="Weighted composition operator laboratory")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON file")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--seed", type=int, help="corpus seed (overrides the config)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", parents=[common], help="validate a symbol and emit the operator")
    b.add_argument("domain", help="domain Space JSON")
    b.add_argument("codomain", help="codomain Space JSON")
    b.add_argument("symbol", help="Symbol JSON {phi, h}")
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", parents=[common], help="run one structural check")
    c.add_argument("kind", choices=sorted(CHECKS))
    c.add_argument("operator")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("recover", parents=[common], help="symbol recovery or decomposition")
    r.add_argument("operators", nargs="+", help="operator file(s); several form a refinement family")
    r.add_argument("--mode", choices=["isometry", "dp", "bijective"], default="isometry")
    r.set_defaults(func=cmd_recover)

    e = sub.add_parser("extend", parents=[common], help="compactification extension analysis")
    e.add_argument("operator")
    e.add_argument("--mode", choices=["isometric", "isometry", "dp"], default="dp")
    e.set_defaults(func=cmd_extend)

    g = sub.add_parser("gallery", parents=[common], help="write golden reports for the examples")
    g.add_argument("name", choices=list(NAMES) + ["all"])
    g.set_defaults(func=cmd_gallery)
    return p


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except InputError as e:
        sys.stderr.write(f"wcl: {e}\n")
        return EXIT_IO
    except WclError as e:
        write_json(_reject(e), args.out)
        log.info("rejected: %s", e)
        return EXIT_REJECT


if __name__ == "__main__":
    sys.exit(main())
