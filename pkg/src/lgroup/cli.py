"""Batch command line: enumeration, conversion, quotients, the
center-by-metabelian calculator, machine-driven word problems, and
grammar shrinking.

Every subcommand reads the block formats of `formats`, writes a fixed
field order, and is byte-identical across reruns.  `--json` swaps the
text for a single-line object tagged `"schema": 1`.  Exit codes: 0 for
success or a true verdict, 1 for a false verdict, 2 for usage or input
errors, 3 when a computation budget is exhausted.

`enum` spells the empty word `eps` even in blocks that declare a letter
of that name, so two distinct words may print alike there; files written
by `convert` never have that ambiguity.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import formats as fmt
from .cfg import cf_shrink_step, cfg_contains, pumping_constant, pumping_decompose
from .fixtures import halting_machines
from .hall import format_element, hall_from_word, verify_f_k
from .halting import Trivial, gamma_probe, h_wp
from .lsystems import (
    ControlledEdt0l,
    Dt0lSystem,
    Dtf0lSystem,
    Edt0lSystem,
    Hdt0lSystem,
    dtf0l_fin_to_edt0l,
    edt0l_to_hdt0l,
    eliminate_control,
    enumerate_words,
    hdt0l_to_edt0l,
)
from .nilpotent import (
    BudgetExceeded,
    abelianization,
    hirsch_length,
    layer_ranks,
    nilpotent_quotient,
)
from .presentations import (
    FiniteRelators,
    LPresentation,
    MarkedPresentation,
    edt0l_to_lpresentation,
    lpresentation_to_dtf0l_fin,
    relators,
)
from .quotients import edt0l_nilpotent_quotient, finite_quotient_test
from .words import base_letter, is_inverse_letter, parse_group_word

__all__ = ["main"]


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _block_header(text: str, path: str) -> str:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line
    raise fmt.FormatError(f"line 1: {path} holds no block")


def _load_any(path: str):
    """Parse a block file by its header: a presentation or a system."""
    text = _read_text(path)
    header = _block_header(text, path)
    if header == "[presentation]":
        return fmt.parse_presentation(text)
    return fmt.parse_system(text, base_dir=os.path.dirname(path) or ".")


def _print(text: str) -> None:
    sys.stdout.write(text)


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _spell_monoid(w) -> str:
    # enum display join: letters run together, the empty word is `eps`.
    if not w:
        return "eps"
    return "".join(
        f"{base_letter(x)}^-1" if is_inverse_letter(x) else x for x in w
    )


def _spell_group(w) -> str:
    if not w:
        return "eps"
    return "".join(name if sign > 0 else f"{name}^-1" for name, sign in w)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_enum(args) -> int:
    value = _load_any(args.path)
    if isinstance(value, MarkedPresentation):
        words = relators(value, args.depth, args.length_cap)
        lines = [_spell_group(w) for w in words]
        kind = "presentation"
    else:
        words = enumerate_words(value, args.depth, args.length_cap)
        lines = [_spell_monoid(w) for w in words]
        kind = "system"
    if args.json:
        _emit_json(
            {
                "schema": 1,
                "kind": kind,
                "depth": args.depth,
                "length_cap": args.length_cap,
                "words": lines,
            }
        )
    else:
        _print("".join(line + "\n" for line in lines))
    return 0


def _convert_system(sys_value, target: str):
    if target == "edt0l":
        if isinstance(sys_value, Edt0lSystem):
            return sys_value
        if isinstance(sys_value, Hdt0lSystem):
            return hdt0l_to_edt0l(sys_value)
        if isinstance(sys_value, ControlledEdt0l):
            return eliminate_control(sys_value)
        if isinstance(sys_value, Dt0lSystem):
            folded = Dtf0lSystem.make(
                sys_value.alphabet, (sys_value.seed,), sys_value.morphisms
            )
            return dtf0l_fin_to_edt0l(folded, ())
        if isinstance(sys_value, Dtf0lSystem):
            return dtf0l_fin_to_edt0l(sys_value, ())
    if target == "hdt0l":
        if isinstance(sys_value, Edt0lSystem):
            return edt0l_to_hdt0l(sys_value)
        if isinstance(sys_value, Hdt0lSystem):
            return sys_value
    raise ValueError(
        f"no conversion from {type(sys_value).__name__} to {target}"
    )


def _cmd_convert(args) -> int:
    value = _load_any(args.path)
    if isinstance(value, MarkedPresentation):
        src = value.source
        if args.to == "lpres":
            if isinstance(src, LPresentation):
                out = value
            else:
                out = edt0l_to_lpresentation(value)
        elif isinstance(src, LPresentation):
            converted = lpresentation_to_dtf0l_fin(value)
            out = MarkedPresentation.make(
                value.generators, _convert_system(converted.source, args.to)
            )
        elif isinstance(src, FiniteRelators):
            raise ValueError("a finite relator list has no system form to convert")
        else:
            out = MarkedPresentation.make(
                value.generators, _convert_system(src, args.to)
            )
        text = fmt.write_presentation(out)
        kind = "presentation"
    else:
        if args.to == "lpres":
            raise ValueError("only presentations convert to lpres; mark one first")
        text = fmt.write_system(_convert_system(value, args.to))
        kind = args.to
    if args.json:
        _emit_json({"schema": 1, "kind": kind, "text": text})
    else:
        _print(text)
    return 0


def _quotient_of(p: MarkedPresentation, cls: int, max_n: int):
    """(pc, relator words, stabilization depth or None) for any source."""
    if isinstance(p.source, LPresentation):
        p = lpresentation_to_dtf0l_fin(p)
    if isinstance(p.source, FiniteRelators):
        words = p.source.words
        return nilpotent_quotient(p.generators, words, cls), words, None
    sq = edt0l_nilpotent_quotient(p, cls, max_depth=max_n)
    return sq.pc, sq.presentation.source.words, sq.depth


def _cmd_nq(args) -> int:
    p = fmt.parse_presentation(_read_text(args.path))
    pc, words, depth = _quotient_of(p, getattr(args, "class"), args.max_n)
    factors = abelianization(p.generators, words)[0]
    ranks = layer_ranks(pc)
    pc_text = fmt.write_pc(pc)
    if args.json:
        _emit_json(
            {
                "schema": 1,
                "class": pc.nilpotency_class,
                "invariant_factors": list(factors),
                "hirsch_length": hirsch_length(pc),
                "layer_ranks": list(ranks),
                "depth": depth,
                "pc": pc_text,
            }
        )
        return 0
    lines = [
        f"class = {pc.nilpotency_class}",
        "invariant_factors =" + "".join(f" {d}" for d in factors),
        f"hirsch_length = {hirsch_length(pc)}",
        "layer_ranks =" + "".join(f" {r}" for r in ranks),
    ]
    if depth is not None:
        lines.append(f"depth = {depth}")
    _print("".join(line + "\n" for line in lines) + pc_text)
    return 0


def _parse_assignment(text: str) -> dict:
    out = {}
    for part in text.split(","):
        name, eq, value = part.partition("=")
        name = name.strip()
        if not eq or not name:
            raise ValueError(f"assignment entries read name=index, got {part!r}")
        try:
            out[name] = int(value)
        except ValueError:
            raise ValueError(f"assignment for {name!r} is not an integer") from None
    return out


def _cmd_finq(args) -> int:
    p = fmt.parse_presentation(_read_text(args.path))
    group = fmt.parse_finite_group(_read_text(args.group))
    f_map = _parse_assignment(args.map)
    accepted = finite_quotient_test(p, group, f_map)
    if args.json:
        _emit_json({"schema": 1, "accepted": accepted, "order": group.order})
    else:
        _print(("accepted" if accepted else "rejected") + "\n")
    return 0 if accepted else 1


def _cmd_stab(args) -> int:
    p = fmt.parse_presentation(_read_text(args.path))
    if isinstance(p.source, LPresentation):
        p = lpresentation_to_dtf0l_fin(p)
    sq = edt0l_nilpotent_quotient(p, getattr(args, "class"), max_depth=args.max_n)
    pres_text = fmt.write_presentation(sq.presentation)
    if args.json:
        _emit_json(
            {
                "schema": 1,
                "class": getattr(args, "class"),
                "depth": sq.depth,
                "presentation": pres_text,
            }
        )
    else:
        _print(f"depth = {sq.depth}\n" + pres_text)
    return 0


def _cmd_hall_verify(args) -> int:
    n = args.n
    rows = [(k, verify_f_k(n, k)) for k in range(1, n - 2)]
    if args.json:
        _emit_json(
            {
                "schema": 1,
                "n": n,
                "rows": [{"k": k, "exp": t} for k, t in rows],
            }
        )
    else:
        _print("".join(f"k={k} exp={t}\n" for k, t in rows))
    return 0


def _cmd_hall_eval(args) -> int:
    w = parse_group_word(args.word, alphabet=("a", "b"))
    x = hall_from_word(w)
    if args.json:
        _emit_json(
            {
                "schema": 1,
                "shift": x.shift,
                "lamps": [list(pair) for pair in x.lamps],
                "center": [list(pair) for pair in x.center],
            }
        )
    else:
        _print(format_element(x) + "\n")
    return 0


def _machine_list(path: Optional[str]):
    if path is None:
        return halting_machines()
    return fmt.parse_machines(_read_text(path))


def _cmd_halting_wp(args) -> int:
    ms = _machine_list(args.machines)
    w = parse_group_word(args.word, alphabet=("a", "b"))
    verdict = h_wp(w, ms)
    if args.json:
        _emit_json({"schema": 1, "trivial": verdict})
    else:
        _print(("true" if verdict else "false") + "\n")
    return 0 if verdict else 1


def _cmd_halting_probe(args) -> int:
    ms = _machine_list(args.machines)
    outcome = gamma_probe(args.idx, getattr(args, "class"), ms, args.budget)
    trivial = isinstance(outcome, Trivial)
    label = "trivial" if trivial else "nontrivial-up-to-budget"
    if args.json:
        _emit_json({"schema": 1, "verdict": label})
    else:
        _print(label + "\n")
    return 0 if trivial else 1


def _cfg_word(args) -> tuple:
    return tuple(args.word.split())


def _cmd_cfg_contains(args) -> int:
    g = fmt.parse_cfg(_read_text(args.path))
    verdict = cfg_contains(g, _cfg_word(args))
    if args.json:
        _emit_json({"schema": 1, "contains": verdict})
    else:
        _print(("true" if verdict else "false") + "\n")
    return 0 if verdict else 1


def _cmd_cfg_constant(args) -> int:
    g = fmt.parse_cfg(_read_text(args.path))
    p = pumping_constant(g)
    if args.json:
        _emit_json({"schema": 1, "constant": p})
    else:
        _print(f"{p}\n")
    return 0


def _cmd_cfg_pump(args) -> int:
    g = fmt.parse_cfg(_read_text(args.path))
    dec = pumping_decompose(g, _cfg_word(args))
    parts = [("u", dec.u), ("v", dec.v), ("w", dec.w), ("x", dec.x), ("y", dec.y)]
    if args.json:
        _emit_json(
            {"schema": 1, **{name: list(part) for name, part in parts}}
        )
    else:
        _print(
            "".join(
                (f"{name} =" + "".join(f" {sym}" for sym in part)) + "\n"
                for name, part in parts
            )
        )
    return 0


def _cmd_cfg_shrink(args) -> int:
    g = fmt.parse_cfg(_read_text(args.path))
    shorter, side = cf_shrink_step(g, _cfg_word(args))
    if args.json:
        _emit_json(
            {
                "schema": 1,
                "shorter": list(shorter),
                "side": [[name, sign] for name, sign in side],
            }
        )
    else:
        _print(
            ("shorter =" + "".join(f" {sym}" for sym in shorter))
            + "\n"
            + f"side = {_spell_group(side)}\n"
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--json", action="store_true", help="emit one JSON object instead of text"
    )
    parser = argparse.ArgumentParser(
        prog="lgroup", description="word-system and nilpotent-quotient toolbox"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("enum", parents=[common], help="enumerate language words")
    p.add_argument("--depth", type=int, required=True, help="composition depth bound")
    p.add_argument("--length-cap", type=int, default=64, dest="length_cap")
    p.add_argument("path")
    p.set_defaults(run=_cmd_enum)

    p = sub.add_parser("convert", parents=[common], help="rewrite between system kinds")
    p.add_argument("--to", choices=("edt0l", "hdt0l", "lpres"), required=True)
    p.add_argument("path")
    p.set_defaults(run=_cmd_convert)

    p = sub.add_parser("nq", parents=[common], help="nilpotent quotient of a presentation")
    p.add_argument("--class", type=int, required=True, help="nilpotency class")
    p.add_argument("--max-n", type=int, default=32, dest="max_n")
    p.add_argument("path")
    p.set_defaults(run=_cmd_nq)

    p = sub.add_parser("finq", parents=[common], help="test a finite marked quotient")
    p.add_argument("--group", required=True, help="group block file")
    p.add_argument("--map", required=True, help='generator images, e.g. "a=3,eps=1"')
    p.add_argument("path")
    p.set_defaults(run=_cmd_finq)

    p = sub.add_parser("stab", parents=[common], help="stabilized finite presentation")
    p.add_argument("--class", type=int, required=True)
    p.add_argument("--max-n", type=int, default=32, dest="max_n")
    p.add_argument("path")
    p.set_defaults(run=_cmd_stab)

    p = sub.add_parser("hall", help="center-by-metabelian calculator")
    hall_sub = p.add_subparsers(dest="hall_command", required=True)
    q = hall_sub.add_parser("verify", parents=[common], help="central power table")
    q.add_argument("--n", type=int, required=True, help="matrix dimension")
    q.set_defaults(run=_cmd_hall_verify)
    q = hall_sub.add_parser("eval", parents=[common], help="normal form of a word")
    q.add_argument("--word", required=True)
    q.set_defaults(run=_cmd_hall_eval)

    p = sub.add_parser("halting", help="machine-driven center quotient")
    halt_sub = p.add_subparsers(dest="halting_command", required=True)
    q = halt_sub.add_parser("wp", parents=[common], help="word problem in the quotient")
    q.add_argument("--machines", help="machine list file (built-in pair if omitted)")
    q.add_argument("--word", required=True)
    q.set_defaults(run=_cmd_halting_wp)
    q = halt_sub.add_parser("probe", parents=[common], help="lower-central probe")
    q.add_argument("--idx", type=int, required=True, help="machine index, from 1")
    q.add_argument("--class", type=int, required=True, help="series index")
    q.add_argument("--budget", type=int, required=True, help="simulation steps")
    q.add_argument("--machines", help="machine list file (built-in pair if omitted)")
    q.set_defaults(run=_cmd_halting_probe)

    p = sub.add_parser("cfg", help="grammar membership and pumping")
    cfg_sub = p.add_subparsers(dest="cfg_command", required=True)
    q = cfg_sub.add_parser("contains", parents=[common])
    q.add_argument("--word", required=True, help="space-separated literal symbols")
    q.add_argument("path")
    q.set_defaults(run=_cmd_cfg_contains)
    q = cfg_sub.add_parser("constant", parents=[common])
    q.add_argument("path")
    q.set_defaults(run=_cmd_cfg_constant)
    q = cfg_sub.add_parser("pump", parents=[common])
    q.add_argument("--word", required=True)
    q.add_argument("path")
    q.set_defaults(run=_cmd_cfg_pump)
    q = cfg_sub.add_parser("shrink", parents=[common])
    q.add_argument("--word", required=True)
    q.add_argument("path")
    q.set_defaults(run=_cmd_cfg_shrink)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (fmt.FormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
