"""Command line front end: ``safegame {validate,solve,matrix} FILE``."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .contracts import compile_game, mixed_equilibria, mixed_payouts
from .documents import (
    GameDocument,
    dumps,
    matrix_dict,
    matrix_table,
    mixed_validation_dict,
    parse_document,
    solve_dict,
    solve_table,
    validation_dict,
    validation_table,
)
from .model import InputError, payouts, profile_from_mask, validate_game
from .solver import DEFAULT_BRUTE_LIMIT, SizeLimitError, classify_and_solve, stable_masks

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_EQUILIBRIUM = 2
EXIT_SIZE = 3

MATRIX_LIMIT = 12
MATRIX_WARN = 5


def _read(path: str) -> GameDocument:
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_document(text)


def _game_of(doc: GameDocument):
    if doc.game is not None:
        return doc.game
    if doc.portfolio.is_uniform:
        return compile_game(doc.portfolio.contracts, doc.portfolio.context)
    return None


def _emit(args, data: dict, table: str) -> None:
    if args.json:
        sys.stdout.write(dumps(data))
    else:
        sys.stdout.write(table + "\n")


def cmd_validate(args) -> int:
    doc = _read(args.path)
    game = _game_of(doc)
    v = validation_dict(validate_game(game)) if game is not None else mixed_validation_dict()
    data = {"validation": v}
    _emit(args, data, validation_table(v))
    return EXIT_OK if v["valid"] else EXIT_INVALID


def cmd_solve(args) -> int:
    doc = _read(args.path)
    game = _game_of(doc)
    if game is not None:
        v = validation_dict(validate_game(game))
        if not v["valid"]:
            _emit(args, {"validation": v}, validation_table(v))
            return EXIT_INVALID
        report = classify_and_solve(game, brute_limit=args.max_brute, force_brute=args.brute_force)
    else:
        v = mixed_validation_dict()
        report = mixed_equilibria(doc.portfolio, max_players=args.max_brute)
    data = {"validation": v, **solve_dict(doc, report, args.expand_families)}
    _emit(args, data, validation_table(v) + "\n" + solve_table(data))
    if args.fail_on_empty and report.exists is False:
        return EXIT_NO_EQUILIBRIUM
    return EXIT_OK


def cmd_matrix(args) -> int:
    doc = _read(args.path)
    ids = doc.ids
    n = len(ids)
    if n > MATRIX_LIMIT:
        raise SizeLimitError(f"{n} players means {2 ** n} profiles; the matrix is limited to {MATRIX_LIMIT} players")
    if n > MATRIX_WARN:
        print(f"warning: printing {2 ** n} profiles", file=sys.stderr)
    if doc.game is not None:
        v = validate_game(doc.game)
        if not v.valid:
            raise InputError("game is not well defined; run 'validate' for details")
        rows = [[payouts(doc.game, profile_from_mask(doc.game, m))[i] for i in ids] for m in range(1 << n)]
    else:
        rows = [
            [mixed_payouts(doc.portfolio, frozenset(pid for k, pid in enumerate(ids) if m >> k & 1))[i] for i in ids]
            for m in range(1 << n)
        ]
    data = matrix_dict(doc, set(stable_masks(n, rows)))
    _emit(args, data, matrix_table(data))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safegame",
        description="Pure-strategy equilibria of SAFE liquidity event games, in exact arithmetic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("path", help="JSON game or portfolio document, or '-' for stdin")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="machine-readable report")
        fmt.add_argument("--table", action="store_true", help="aligned text tables (default)")

    p = sub.add_parser("validate", help="check that the game is well defined")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="classify the game and compute its equilibria")
    common(p)
    p.add_argument("--brute-force", action="store_true", help="enumerate every profile regardless of class")
    p.add_argument("--max-brute", type=int, default=DEFAULT_BRUTE_LIMIT, metavar="N",
                   help="largest player count to enumerate exhaustively (default %(default)s)")
    p.add_argument("--expand-families", type=int, default=None, metavar="CAP",
                   help="list every member of equilibrium families, up to CAP members")
    p.add_argument("--fail-on-empty", action="store_true", help="exit with status 2 when no equilibrium exists")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("matrix", help=f"payouts for every profile (at most {MATRIX_LIMIT} players)")
    common(p)
    p.set_defaults(func=cmd_matrix)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
