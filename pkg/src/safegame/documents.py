"""JSON game/portfolio documents and report rendering."""

from __future__ import annotations

import decimal
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .contracts import CompanyContext, MixedGame, SafeContract, Variant, compile_game, mixed_payouts
from .model import InputError, LiquidityGame, Player, ValidationReport, g_value, payouts
from .rationals import format_approx, format_exact, to_rational
from .solver import EquilibriumReport, all_equilibria

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class GameDocument:
    schema_version: str
    game: LiquidityGame | None = None
    portfolio: MixedGame | None = None

    @property
    def ids(self) -> tuple:
        return self.game.ids if self.game is not None else self.portfolio.ids

    def payouts(self, K) -> dict:
        if self.game is not None:
            return payouts(self.game, K)
        return mixed_payouts(self.portfolio, K)


# -- parsing -----------------------------------------------------------------------

def _number(raw: Any, where: str, *, positive: bool = False, nonnegative: bool = False) -> Fraction:
    try:
        x = to_rational(raw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None
    if positive and x <= 0:
        raise InputError(f"{where}: must be positive, got {x}")
    if nonnegative and x < 0:
        raise InputError(f"{where}: must be nonnegative, got {x}")
    return x


def _optional(obj: dict, key: str, where: str, **kw) -> Fraction | None:
    if obj.get(key) is None:
        return None
    return _number(obj[key], f"{where}.{key}", **kw)


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    if key not in obj:
        raise InputError(f"{where}: missing field '{key}'")
    return obj[key]


def _player_id(raw: Any, where: str):
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise InputError(f"{where}.id: ids must be strings or integers")
    return raw


def _parse_game(obj: Any) -> LiquidityGame:
    where = "game"
    V = _number(_field(obj, "V", where), "game.V", positive=True)
    beta = _number(_field(obj, "beta", where), "game.beta", positive=True)
    raw_players = _field(obj, "players", where)
    if not isinstance(raw_players, list) or not raw_players:
        raise InputError("game.players: expected a nonempty list")
    players = []
    for k, rp in enumerate(raw_players):
        w = f"game.players[{k}]"
        players.append(Player(
            _player_id(_field(rp, "id", w), w),
            _number(_field(rp, "p", w), f"{w}.p", positive=True),
            _number(_field(rp, "alpha", w), f"{w}.alpha", nonnegative=True),
            _number(_field(rp, "gamma", w), f"{w}.gamma", positive=True),
        ))
    return LiquidityGame(V, beta, tuple(players))


def _parse_portfolio(obj: Any) -> MixedGame:
    ctx_raw = _field(obj, "context", "portfolio")
    w = "portfolio.context"
    context = CompanyContext(
        common_shares=_number(_field(ctx_raw, "common_shares", w), f"{w}.common_shares", positive=True),
        V=_number(_field(ctx_raw, "V", w), f"{w}.V", positive=True),
        share_price=_optional(ctx_raw, "share_price", w, positive=True),
    )
    raw_safes = _field(obj, "safes", "portfolio")
    if not isinstance(raw_safes, list) or not raw_safes:
        raise InputError("portfolio.safes: expected a nonempty list")
    safes = []
    for k, rs in enumerate(raw_safes):
        w = f"portfolio.safes[{k}]"
        variant_raw = _field(rs, "variant", w)
        try:
            variant = Variant(variant_raw)
        except ValueError:
            choices = ", ".join(v.value for v in Variant)
            raise InputError(f"{w}.variant: unknown variant {variant_raw!r} (one of {choices})") from None
        safes.append(SafeContract(
            _player_id(_field(rs, "id", w), w),
            variant,
            _number(_field(rs, "principal", w), f"{w}.principal", positive=True),
            cap=_optional(rs, "cap", w, positive=True),
            discount_rate=_optional(rs, "discount_rate", w, positive=True),
        ))
    return MixedGame(tuple(safes), context)


def parse_document(text: str) -> GameDocument:
    """Parse a JSON document; decimals are read exactly, never as binary floats."""
    try:
        raw = json.loads(text, parse_float=decimal.Decimal)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise InputError("document must be a JSON object")
    version = str(raw.get("schema_version", SCHEMA_VERSION))
    has_game, has_portfolio = "game" in raw, "portfolio" in raw
    if has_game == has_portfolio:
        raise InputError("document needs exactly one of 'game' or 'portfolio'")
    if has_game:
        return GameDocument(version, game=_parse_game(raw["game"]))
    return GameDocument(version, portfolio=_parse_portfolio(raw["portfolio"]))


def document_to_dict(doc: GameDocument) -> dict:
    out: dict[str, Any] = {"schema_version": doc.schema_version}
    if doc.game is not None:
        g = doc.game
        out["game"] = {
            "V": format_exact(g.V),
            "beta": format_exact(g.beta),
            "players": [
                {"id": pl.id, "p": format_exact(pl.p), "alpha": format_exact(pl.alpha),
                 "gamma": format_exact(pl.gamma)}
                for pl in g.players
            ],
        }
    else:
        m = doc.portfolio
        ctx: dict[str, Any] = {"common_shares": format_exact(m.context.common_shares)}
        if m.context.share_price is not None:
            ctx["share_price"] = format_exact(m.context.share_price)
        ctx["V"] = format_exact(m.context.V)
        safes = []
        for c in m.contracts:
            entry: dict[str, Any] = {"id": c.id, "variant": c.variant.value, "principal": format_exact(c.principal)}
            if c.cap is not None:
                entry["cap"] = format_exact(c.cap)
            if c.discount_rate is not None:
                entry["discount_rate"] = format_exact(c.discount_rate)
            safes.append(entry)
        out["portfolio"] = {"context": ctx, "safes": safes}
    return out


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- report rendering ------------------------------------------------------------------

def number_entry(x: Fraction) -> dict:
    return {"exact": format_exact(x), "approx": format_approx(x)}


def _ordered_ids(ids: tuple, K) -> list:
    return [pid for pid in ids if pid in K]


def _payout_entries(ids: tuple, vector: dict) -> list:
    return [{"id": pid, **number_entry(vector[pid])} for pid in ids]


def validation_dict(report: ValidationReport) -> dict:
    violations = []
    for v in report.violations:
        witness = sorted(v.witness, key=str) if isinstance(v.witness, frozenset) else v.witness
        violations.append({"condition": v.condition, "witness": witness, "explanation": v.explanation})
    return {
        "valid": report.valid,
        "solvable": report.solvable,
        "eq1_method": report.eq1_method,
        "violations": violations,
    }


def mixed_validation_dict() -> dict:
    return {
        "valid": True,
        "solvable": None,
        "eq1_method": "post-money feasibility",
        "violations": [],
    }


def solve_dict(doc: GameDocument, report: EquilibriumReport, expand_cap: int | None = None) -> dict:
    ids = doc.ids
    game = doc.game
    if game is None and doc.portfolio.is_uniform:
        game = compile_game(doc.portfolio.contracts, doc.portfolio.context)
    equilibria = []
    for K in report.equilibria:
        equilibria.append({
            "cashout_ids": _ordered_ids(ids, K),
            "payouts": _payout_entries(ids, doc.payouts(K)),
            "g": number_entry(g_value(game, K)) if game is not None else None,
            "is_optimum": K == report.optimum,
        })
    families = [
        {"base_ids": _ordered_ids(ids, f.base), "free_ids": _ordered_ids(ids, f.free_players), "size": f.size}
        for f in report.families
    ]
    out: dict[str, Any] = {
        "classification": report.game_class.value if report.game_class else "Mixed",
        "method": report.method,
        "exists": report.exists,
        "complete": report.complete,
        "optimum_guaranteed": report.optimum_guaranteed,
        "equilibria": equilibria,
        "families": families,
        "diagnostics": list(report.diagnostics),
    }
    if expand_cap is not None and report.families:
        members = all_equilibria(game, report, expand_cap)
        out["expanded_equilibria"] = [_ordered_ids(ids, K) for K in members]
    return out


def matrix_dict(doc: GameDocument, stable_masks: set[int]) -> dict:
    ids = doc.ids
    rows = []
    for mask in range(1 << len(ids)):
        K = frozenset(pid for k, pid in enumerate(ids) if mask >> k & 1)
        rows.append({
            "mask": mask,
            "cashout_ids": _ordered_ids(ids, K),
            "payouts": _payout_entries(ids, doc.payouts(K)),
            "is_equilibrium": mask in stable_masks,
        })
    return {"players": list(ids), "profiles": rows}


# -- text tables ----------------------------------------------------------------------

def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[c]) for r in rows)) if rows else len(h) for c, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def _set_str(ids: list) -> str:
    return "{" + ", ".join(map(str, ids)) + "}"


def _num_str(entry: dict) -> str:
    return f"{entry['exact']} (~{entry['approx']})"


def validation_table(v: dict) -> str:
    solvable = "n/a" if v["solvable"] is None else v["solvable"]
    lines = [f"valid:    {v['valid']}", f"solvable: {solvable}"]
    for item in v["violations"]:
        lines.append(f"  [{item['condition']}] {item['witness']}: {item['explanation']}")
    return "\n".join(lines)


def solve_table(report: dict) -> str:
    out = [
        f"class:  {report['classification']}",
        f"method: {report['method']}",
        f"exists: {report['exists']}",
    ]
    rows = []
    for e in report["equilibria"]:
        pays = ", ".join(f"{p['id']}={_num_str(p)}" for p in e["payouts"])
        g = _num_str(e["g"]) if e["g"] else "-"
        rows.append([_set_str(e["cashout_ids"]), pays, g, "*" if e["is_optimum"] else ""])
    if rows:
        out.append("")
        out.append(_table(["cashout set", "payouts", "g", "optimum"], rows))
    for f in report["families"]:
        out.append(f"family: base {_set_str(f['base_ids'])} + any subset of "
                   f"{_set_str(f['free_ids'])} ({f['size']} equilibria)")
    if "expanded_equilibria" in report:
        out.append(f"expanded: {len(report['expanded_equilibria'])} equilibria")
        out.extend("  " + _set_str(K) for K in report["expanded_equilibria"])
    for d in report["diagnostics"]:
        out.append(f"note: {d}")
    return "\n".join(out)


def matrix_table(m: dict) -> str:
    headers = ["cashout set"] + [str(pid) for pid in m["players"]] + ["nash"]
    rows = []
    for r in m["profiles"]:
        rows.append([_set_str(r["cashout_ids"])] + [_num_str(p) for p in r["payouts"]]
                    + ["yes" if r["is_equilibrium"] else ""])
    return _table(headers, rows)
