"""Text formats for the values the command line reads and writes.

Each file holds one block: a bracketed header naming the kind, then
`key = value` lines and kind-specific statement lines.  Empty lines and
`#` comments are ignored.  The empty word is the literal token `eps`
and a formal inverse letter is spelled `x^-1`; a declared letter named
`eps` shadows the empty-word reading inside that block, exactly like
the word parser in `words`.

Writers emit a canonical form that parses back to an equal value, and
parsing canonical text and re-writing it reproduces the bytes.  All
parse failures raise FormatError with a 1-based line number.
"""

from __future__ import annotations

import os
from typing import Dict, List, Optional, Sequence, Tuple

from .automata import ControlLanguage, Dfa
from .cfg import Cfg
from .halting import MachineList, TuringMachine
from .lsystems import (
    ControlledEdt0l,
    Dt0lSystem,
    Dtf0lSystem,
    Edt0lSystem,
    Hdt0lSystem,
)
from .nilpotent import PcPresentation
from .presentations import FiniteRelators, LPresentation, MarkedPresentation
from .quotients import FiniteGroup
from .words import (
    GroupEndomorphism,
    GroupWord,
    MonoidMorphism,
    MonoidWord,
    base_letter,
    check_symbol,
    inverse_letter,
    is_inverse_letter,
    parse_group_word,
)

__all__ = [
    "FormatError",
    "format_group_word",
    "format_word",
    "parse_cfg",
    "parse_dfa",
    "parse_finite_group",
    "parse_machines",
    "parse_pc",
    "parse_presentation",
    "parse_system",
    "write_cfg",
    "write_dfa",
    "write_finite_group",
    "write_machines",
    "write_pc",
    "write_presentation",
    "write_system",
]


class FormatError(ValueError):
    """Malformed block text; the message starts with the 1-based line."""


def _fail(lineno: int, msg: str) -> None:
    raise FormatError(f"line {lineno}: {msg}")


def _logical_lines(text: str) -> List[Tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((i, line))
    return out


# ------------------------------------------------------------------ words


def _render_letter(letter: str) -> str:
    if is_inverse_letter(letter):
        return f"{base_letter(letter)}^-1"
    return letter


def format_word(w: MonoidWord, declared: Sequence[str] = ()) -> str:
    """Canonical text for a monoid word; ε renders as `eps`.

    The empty word has no spelling when a letter named eps is declared,
    so that combination is rejected rather than silently conflated.
    """
    if not w:
        if "eps" in declared:
            raise FormatError(
                "the empty word has no rendering when a letter is named eps"
            )
        return "eps"
    return " ".join(_render_letter(x) for x in w)


def format_group_word(w: GroupWord, declared: Sequence[str] = ()) -> str:
    """Canonical text for a group word; ε renders as `eps`."""
    if not w:
        if "eps" in declared:
            raise FormatError(
                "the empty word has no rendering when a generator is named eps"
            )
        return "eps"
    return " ".join(name if sign > 0 else f"{name}^-1" for name, sign in w)


def _word_part(w: MonoidWord, declared: Sequence[str]) -> str:
    # Inside a block that declares a letter named eps, the empty word is
    # written as an empty field instead.
    if not w and "eps" in declared:
        return ""
    return format_word(w, declared)


def _group_word_part(w: GroupWord, gens: Sequence[str]) -> str:
    if not w and "eps" in gens:
        return ""
    return format_group_word(w, gens)


def _field(key: str, rendered: str) -> str:
    return f"{key} = {rendered}".rstrip()


def _braced(prefix: str, body: str) -> str:
    return f"{prefix} {{ {body} }}" if body else f"{prefix} {{ }}"


def _parse_token(lineno: int, token: str) -> Tuple[str, int]:
    name, caret, exp = token.partition("^")
    try:
        check_symbol(name)
    except ValueError as e:
        _fail(lineno, str(e))
    k = 1
    if caret:
        try:
            k = int(exp)
        except ValueError:
            _fail(lineno, f"bad exponent in token {token!r}")
    return name, k


def _int(lineno: int, token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        _fail(lineno, f"{what} must be an integer, got {token!r}")
    raise AssertionError("unreachable")


def _parse_word(lineno: int, text: str, letters: Sequence[str]) -> MonoidWord:
    out: List[str] = []
    letter_set = set(letters)
    for token in text.split():
        name, k = _parse_token(lineno, token)
        if name == "eps" and "eps" not in letter_set:
            continue
        if k == 0:
            continue
        letter = name if k > 0 else inverse_letter(name)
        if letter not in letter_set:
            _fail(lineno, f"letter {token!r} outside the declared alphabet")
        out.extend([letter] * abs(k))
    return tuple(out)


def _parse_group_word(lineno: int, text: str, gens: Sequence[str]) -> GroupWord:
    try:
        return parse_group_word(text, alphabet=gens)
    except ValueError as e:
        _fail(lineno, str(e))
    raise AssertionError("unreachable")


def _parse_letter_decl(lineno: int, text: str) -> Tuple[str, ...]:
    letters = []
    for token in text.split():
        name, k = _parse_token(lineno, token)
        if k not in (1, -1):
            _fail(lineno, f"alphabet entry {token!r} is not a single letter")
        letters.append(name if k > 0 else inverse_letter(name))
    return tuple(letters)


def _parse_name_decl(lineno: int, text: str) -> Tuple[str, ...]:
    names = []
    for token in text.split():
        if "^" in token:
            _fail(lineno, f"generator name {token!r} cannot carry an exponent")
        try:
            check_symbol(token)
        except ValueError as e:
            _fail(lineno, str(e))
        names.append(token)
    return tuple(names)


# ------------------------------------------------------------- line scaffolding


def _require_header(lines: List[Tuple[int, str]], *headers: str) -> str:
    if not lines:
        raise FormatError("line 1: empty input")
    lineno, line = lines[0]
    if line not in headers:
        _fail(lineno, f"expected header {' or '.join(headers)}, got {line!r}")
    return line


def _split_braces(lineno: int, rest: str) -> Tuple[str, str]:
    head, brace, body = rest.partition("{")
    if not brace or not body.rstrip().endswith("}"):
        _fail(lineno, "expected a single-line brace block: name { ... }")
    return head.strip(), body.rstrip()[:-1]


def _parse_arrow_entries(
    lineno: int,
    body: str,
    domain: Sequence[str],
    codomain: Sequence[str],
) -> Dict[str, MonoidWord]:
    entries: Dict[str, MonoidWord] = {}
    body = body.strip()
    if not body:
        return entries
    for part in body.split(";"):
        lhs, arrow, rhs = part.partition("->")
        if not arrow:
            _fail(lineno, "map entry needs '->'")
        tokens = lhs.split()
        if len(tokens) != 1:
            _fail(lineno, f"map entry left side must be one letter, got {lhs.strip()!r}")
        name, k = _parse_token(lineno, tokens[0])
        if k not in (1, -1):
            _fail(lineno, f"map entry left side {tokens[0]!r} is not a single letter")
        letter = name if k > 0 else inverse_letter(name)
        if letter not in set(domain):
            _fail(lineno, f"map entry for {tokens[0]!r} outside the alphabet")
        if letter in entries:
            _fail(lineno, f"duplicate map entry for {tokens[0]!r}")
        entries[letter] = _parse_word(lineno, rhs, codomain)
    return entries


def _render_map_body(
    m: MonoidMorphism, domain_order: Sequence[str], declared: Sequence[str]
) -> str:
    image = dict(m.images)
    parts = []
    for letter in domain_order:
        w = image[letter]
        if w == (letter,):
            continue
        entry = f"{_render_letter(letter)} -> {_word_part(w, declared)}"
        parts.append(entry.rstrip())
    return " ; ".join(parts)


def _morphism_from_entries(
    entries: Dict[str, MonoidWord],
    domain: Sequence[str],
    codomain: Sequence[str],
) -> MonoidMorphism:
    table = {x: entries.get(x, (x,)) for x in domain}
    return MonoidMorphism.make(domain, codomain, table)


class _KeyReader:
    """key = value lines of a block, with presence and typo reporting."""

    def __init__(self) -> None:
        self.values: Dict[str, Tuple[int, str]] = {}

    def add(self, lineno: int, line: str) -> None:
        key, eq, value = line.partition("=")
        if not eq:
            _fail(lineno, f"expected `key = value`, got {line!r}")
        key = key.strip()
        if key in self.values:
            _fail(lineno, f"duplicate key {key!r}")
        self.values[key] = (lineno, value.strip())

    def take(self, key: str, header_lineno: int) -> Tuple[int, str]:
        if key not in self.values:
            _fail(header_lineno, f"missing required line `{key} = ...`")
        return self.values.pop(key)

    def take_optional(self, key: str) -> Optional[Tuple[int, str]]:
        return self.values.pop(key, None)

    def finish(self) -> None:
        for key, (lineno, _) in self.values.items():
            _fail(lineno, f"unexpected key {key!r} for this block")

    def take_int(self, key: str, header_lineno: int) -> Tuple[int, int]:
        lineno, value = self.take(key, header_lineno)
        try:
            return lineno, int(value)
        except ValueError:
            _fail(lineno, f"{key} must be an integer, got {value!r}")
        raise AssertionError("unreachable")


# ------------------------------------------------------------------------ DFA


def parse_dfa(text: str) -> Dfa:
    return _parse_dfa_lines(_logical_lines(text))


def _parse_dfa_lines(lines: List[Tuple[int, str]]) -> Dfa:
    _require_header(lines, "[dfa]")
    header_lineno = lines[0][0]
    keys = _KeyReader()
    raw_trans: List[Tuple[int, str]] = []
    for lineno, line in lines[1:]:
        if line.startswith("trans "):
            raw_trans.append((lineno, line[6:]))
        else:
            keys.add(lineno, line)
    alpha_lineno, alpha_text = keys.take("alphabet", header_lineno)
    alphabet = _parse_name_decl(alpha_lineno, alpha_text)
    _, n_states = keys.take_int("states", header_lineno)
    _, initial = keys.take_int("initial", header_lineno)
    acc_lineno, acc_text = keys.take("accepting", header_lineno)
    keys.finish()
    try:
        accepting = frozenset(int(tok) for tok in acc_text.split())
    except ValueError:
        _fail(acc_lineno, f"accepting states must be integers, got {acc_text!r}")
    transitions = []
    for lineno, rest in raw_trans:
        tokens = rest.split()
        if len(tokens) != 3:
            _fail(lineno, "transition lines read `trans state symbol state`")
        q = _int(lineno, tokens[0], "transition state")
        r = _int(lineno, tokens[2], "transition state")
        if tokens[1] not in alphabet:
            _fail(lineno, f"transition symbol {tokens[1]!r} outside the alphabet")
        transitions.append((q, tokens[1], r))
    try:
        return Dfa.make(alphabet, n_states, initial, accepting, transitions)
    except ValueError as e:
        _fail(header_lineno, str(e))
    raise AssertionError("unreachable")


def write_dfa(dfa: Dfa) -> str:
    lines = [
        "[dfa]",
        "alphabet =" + "".join(f" {sym}" for sym in dfa.alphabet),
        f"states = {dfa.n_states}",
        f"initial = {dfa.initial}",
        "accepting =" + "".join(f" {q}" for q in sorted(dfa.accepting)),
    ]
    lines.extend(f"trans {q} {sym} {r}" for q, sym, r in dfa.transitions)
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- systems

_SYSTEM_HEADERS = ("[dt0l]", "[dtf0l]", "[edt0l]", "[hdt0l]", "[cedt0l]")


def parse_system(text: str, base_dir: Optional[str] = None):
    """Parse any of the five system blocks.

    `base_dir` anchors the control-automaton file reference of a
    `[cedt0l]` block; it defaults to the working directory.
    """
    return _parse_system_lines(_logical_lines(text), base_dir)


def _parse_system_lines(lines: List[Tuple[int, str]], base_dir: Optional[str]):
    kind = _require_header(lines, *_SYSTEM_HEADERS)
    header_lineno = lines[0][0]
    keys = _KeyReader()
    maps: List[Tuple[int, str, str]] = []
    final_block: Optional[Tuple[int, str]] = None
    for lineno, line in lines[1:]:
        if line.startswith("["):
            _fail(lineno, "unexpected second block header")
        if line.startswith("map "):
            name, body = _split_braces(lineno, line[4:])
            tokens = name.split()
            if len(tokens) != 1:
                _fail(lineno, f"map needs exactly one name, got {name!r}")
            maps.append((lineno, tokens[0], body))
        elif line == "final" or line.startswith("final ") or line.startswith("final{"):
            head, body = _split_braces(lineno, line[5:])
            if head:
                _fail(lineno, "final block takes no name")
            if final_block is not None:
                _fail(lineno, "duplicate final block")
            final_block = (lineno, body)
        else:
            keys.add(lineno, line)
    term_lineno, term_text = keys.take("terminals", header_lineno)
    terminals = _parse_letter_decl(term_lineno, term_text)

    def build_maps(domain, codomain):
        pairs = []
        for lineno, name, body in maps:
            entries = _parse_arrow_entries(lineno, body, domain, codomain)
            try:
                pairs.append((name, _morphism_from_entries(entries, domain, codomain)))
            except ValueError as e:
                _fail(lineno, str(e))
        return tuple(pairs)

    try:
        if kind in ("[dt0l]", "[dtf0l]"):
            if final_block is not None:
                _fail(final_block[0], f"{kind} blocks have no final map")
            table = build_maps(terminals, terminals)
            if kind == "[dt0l]":
                seed_lineno, seed_text = keys.take("seed", header_lineno)
                keys.finish()
                seed = _parse_word(seed_lineno, seed_text, terminals)
                return Dt0lSystem.make(terminals, seed, table)
            seeds_lineno, seeds_text = keys.take("seeds", header_lineno)
            keys.finish()
            seeds = tuple(
                _parse_word(seeds_lineno, part, terminals)
                for part in seeds_text.split(";")
            )
            return Dtf0lSystem.make(terminals, seeds, table)

        nt_lineno, nt_text = keys.take("nonterminals", header_lineno)
        nonterminals = _parse_letter_decl(nt_lineno, nt_text)
        seed_lineno, seed_text = keys.take("seed", header_lineno)

        if kind == "[hdt0l]":
            if final_block is None:
                _fail(header_lineno, "a [hdt0l] block needs a final map")
            inner = nonterminals
            seed = _parse_word(seed_lineno, seed_text, inner)
            table = build_maps(inner, inner)
            fin_lineno, fin_body = final_block
            entries = _parse_arrow_entries(fin_lineno, fin_body, inner, terminals)
            final = MonoidMorphism.make(
                inner, terminals, {x: entries.get(x, ()) for x in inner}
            )
            keys.finish()
            return Hdt0lSystem.make(inner, seed, table, final)

        if final_block is not None:
            _fail(final_block[0], f"{kind} blocks have no final map")
        alphabet = terminals + nonterminals
        seed = _parse_word(seed_lineno, seed_text, alphabet)
        table = build_maps(alphabet, alphabet)
        if kind == "[edt0l]":
            keys.finish()
            return Edt0lSystem.make(terminals, nonterminals, seed, table)

        ctrl_lineno, ctrl_ref = keys.take("control", header_lineno)
        keys.finish()
        path = os.path.join(base_dir or ".", ctrl_ref)
        try:
            with open(path, encoding="utf-8") as fh:
                ctrl_text = fh.read()
        except OSError as e:
            _fail(ctrl_lineno, f"cannot read control file {ctrl_ref!r}: {e}")
        dfa = parse_dfa(ctrl_text)
        system = Edt0lSystem.make(terminals, nonterminals, seed, table)
        return ControlledEdt0l.make(system, ControlLanguage(dfa))
    except FormatError:
        raise
    except ValueError as e:
        _fail(header_lineno, str(e))


def _letters_line(key: str, letters: Sequence[str]) -> str:
    return f"{key} =" + "".join(f" {_render_letter(x)}" for x in letters)


def write_system(sys, control_ref: Optional[str] = None) -> str:
    """Canonical block for a system; `control_ref` is the file name to
    record for a controlled system's automaton (written separately)."""
    if isinstance(sys, ControlledEdt0l):
        if control_ref is None:
            raise ValueError("a controlled system needs a control file reference")
        body = _system_lines("[cedt0l]", sys.system)
        body.append(f"control = {control_ref}")
        return "\n".join(body) + "\n"
    return "\n".join(_system_lines(None, sys)) + "\n"


def _system_lines(forced_header: Optional[str], sys) -> List[str]:
    if isinstance(sys, Dt0lSystem):
        lines = [forced_header or "[dt0l]", _letters_line("terminals", sys.alphabet)]
        lines.append(_field("seed", _word_part(sys.seed, sys.alphabet)))
        domain = sys.alphabet
    elif isinstance(sys, Dtf0lSystem):
        lines = [forced_header or "[dtf0l]", _letters_line("terminals", sys.alphabet)]
        seeds = " ; ".join(_word_part(s, sys.alphabet) for s in sys.seeds)
        lines.append(_field("seeds", seeds))
        domain = sys.alphabet
    elif isinstance(sys, Edt0lSystem):
        lines = [
            forced_header or "[edt0l]",
            _letters_line("terminals", sys.terminals),
            _letters_line("nonterminals", sys.nonterminals),
        ]
        domain = sys.terminals + sys.nonterminals
        lines.append(_field("seed", _word_part(sys.seed, domain)))
    elif isinstance(sys, Hdt0lSystem):
        lines = [
            forced_header or "[hdt0l]",
            _letters_line("terminals", sys.final.codomain),
            _letters_line("nonterminals", sys.inner),
        ]
        domain = sys.inner
        lines.append(_field("seed", _word_part(sys.seed, domain)))
    else:
        raise ValueError(f"cannot serialize {type(sys).__name__}")
    for name, m in sys.morphisms:
        lines.append(_braced(f"map {name}", _render_map_body(m, domain, domain)))
    if isinstance(sys, Hdt0lSystem):
        image = dict(sys.final.images)
        parts = []
        for letter in sys.inner:
            w = image[letter]
            entry = f"{_render_letter(letter)} -> {_word_part(w, sys.final.codomain)}"
            parts.append(entry.rstrip())
        lines.append(_braced("final", " ; ".join(parts)))
    return lines


# ------------------------------------------------------------------------ CFG


def parse_cfg(text: str) -> Cfg:
    """Parse a `[cfg]` block; rule tokens are literal symbol names, the
    nonterminals are the rule left sides, and everything else on a right
    side is a terminal."""
    lines = _logical_lines(text)
    _require_header(lines, "[cfg]")
    header_lineno = lines[0][0]
    keys = _KeyReader()
    raw_rules: List[Tuple[int, str]] = []
    for lineno, line in lines[1:]:
        if line.startswith("rule "):
            raw_rules.append((lineno, line[5:]))
        else:
            keys.add(lineno, line)
    start_lineno, start = keys.take("start", header_lineno)
    keys.finish()
    try:
        check_symbol(start)
    except ValueError as e:
        _fail(start_lineno, str(e))
    rules: List[Tuple[str, Tuple[str, ...]]] = []
    nonterminals: List[str] = []
    for lineno, rest in raw_rules:
        lhs, arrow, rhs = rest.partition("->")
        if not arrow:
            _fail(lineno, "rule lines read `rule S -> symbols`")
        lhs_tokens = lhs.split()
        if len(lhs_tokens) != 1:
            _fail(lineno, f"rule left side must be one symbol, got {lhs.strip()!r}")
        for token in lhs_tokens + rhs.split():
            if "^" in token:
                _fail(lineno, f"grammar symbols carry no exponents: {token!r}")
            try:
                check_symbol(token)
            except ValueError as e:
                _fail(lineno, str(e))
        if lhs_tokens[0] not in nonterminals:
            nonterminals.append(lhs_tokens[0])
        rules.append((lhs_tokens[0], tuple(rhs.split())))
    if start not in nonterminals:
        nonterminals.insert(0, start)
    terminals: List[str] = []
    for _, rhs in rules:
        for sym in rhs:
            if sym not in nonterminals and sym not in terminals:
                terminals.append(sym)
    try:
        return Cfg.make(terminals, nonterminals, start, rules)
    except ValueError as e:
        _fail(header_lineno, str(e))
    raise AssertionError("unreachable")


def write_cfg(g: Cfg) -> str:
    lines = ["[cfg]", f"start = {g.start}"]
    for lhs, rhs in g.rules:
        lines.append(f"rule {lhs} ->" + "".join(f" {sym}" for sym in rhs))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- presentation


def parse_presentation(text: str) -> MarkedPresentation:
    lines = _logical_lines(text)
    _require_header(lines, "[presentation]")
    header_lineno = lines[0][0]
    sub_start = None
    for pos, (lineno, line) in enumerate(lines):
        if pos > 0 and line.startswith("["):
            sub_start = pos
            break
    head = lines[1:sub_start] if sub_start is not None else lines[1:]
    keys = _KeyReader()
    relator_lines: List[Tuple[int, str]] = []
    q_block = r_block = None
    endo_lines: List[Tuple[int, str, str]] = []
    for lineno, line in head:
        if line.startswith("relator ") or line == "relator":
            relator_lines.append((lineno, line[7:].strip()))
        elif line.startswith("Q ") or line.startswith("Q{"):
            _, body = _split_braces(lineno, line[1:])
            if q_block is not None:
                _fail(lineno, "duplicate Q block")
            q_block = (lineno, body)
        elif line.startswith("R ") or line.startswith("R{"):
            _, body = _split_braces(lineno, line[1:])
            if r_block is not None:
                _fail(lineno, "duplicate R block")
            r_block = (lineno, body)
        elif line.startswith("endo "):
            name, body = _split_braces(lineno, line[5:])
            tokens = name.split()
            if len(tokens) != 1:
                _fail(lineno, f"endo needs exactly one name, got {name!r}")
            endo_lines.append((lineno, tokens[0], body))
        else:
            keys.add(lineno, line)
    gens_lineno, gens_text = keys.take("generators", header_lineno)
    gens = _parse_name_decl(gens_lineno, gens_text)
    src_lineno, source = keys.take("source", header_lineno)
    keys.finish()

    def no_statements(*groups):
        for group in groups:
            if group:
                _fail(group[0][0], f"statement not allowed for source = {source}")

    def no_block(block, what):
        if block is not None:
            _fail(block[0], f"{what} block not allowed for source = {source}")

    try:
        if source == "finite":
            no_statements(endo_lines)
            no_block(q_block, "Q")
            no_block(r_block, "R")
            if sub_start is not None:
                _fail(lines[sub_start][0], "source = finite embeds no system block")
            words = tuple(
                _parse_group_word(lineno, text, gens) for lineno, text in relator_lines
            )
            return MarkedPresentation.finite(gens, words)
        if source == "lpres":
            no_statements(relator_lines)
            if sub_start is not None:
                _fail(lines[sub_start][0], "source = lpres embeds no system block")
            once = _parse_word_list(q_block, gens)
            iterated = _parse_word_list(r_block, gens)
            endos = []
            for lineno, name, body in endo_lines:
                entries: Dict[str, GroupWord] = {}
                body = body.strip()
                if body:
                    for part in body.split(";"):
                        lhs, arrow, rhs = part.partition("->")
                        if not arrow:
                            _fail(lineno, "endo entry needs '->'")
                        lhs = lhs.strip()
                        if lhs not in gens:
                            _fail(lineno, f"endo entry for unknown generator {lhs!r}")
                        if lhs in entries:
                            _fail(lineno, f"duplicate endo entry for {lhs!r}")
                        entries[lhs] = _parse_group_word(lineno, rhs, gens)
                table = {s: entries.get(s, ((s, 1),)) for s in gens}
                try:
                    endos.append((name, GroupEndomorphism.make(gens, table)))
                except ValueError as e:
                    _fail(lineno, str(e))
            lp = LPresentation.make(gens, once, endos, iterated)
            return MarkedPresentation.make(gens, lp)
        if source in ("edt0l", "hdt0l"):
            no_statements(relator_lines, endo_lines)
            no_block(q_block, "Q")
            no_block(r_block, "R")
            if sub_start is None:
                _fail(header_lineno, f"source = {source} needs an embedded system block")
            expected = f"[{source}]"
            if lines[sub_start][1] != expected:
                _fail(lines[sub_start][0], f"embedded block must be {expected}")
            system = _parse_system_lines(lines[sub_start:], None)
            return MarkedPresentation.make(gens, system)
        _fail(src_lineno, f"unknown source {source!r}")
    except FormatError:
        raise
    except ValueError as e:
        _fail(header_lineno, str(e))
    raise AssertionError("unreachable")


def _parse_word_list(block, gens) -> Tuple[GroupWord, ...]:
    if block is None:
        return ()
    lineno, body = block
    body = body.strip()
    if not body:
        return ()
    return tuple(_parse_group_word(lineno, part, gens) for part in body.split(";"))


def write_presentation(p: MarkedPresentation) -> str:
    gens = p.generators
    lines = ["[presentation]", "generators =" + "".join(f" {s}" for s in gens)]
    src = p.source
    if isinstance(src, FiniteRelators):
        lines.append("source = finite")
        for w in src.words:
            lines.append(("relator " + _group_word_part(w, gens)).rstrip())
    elif isinstance(src, LPresentation):
        lines.append("source = lpres")
        if src.once:
            words = " ; ".join(_group_word_part(w, gens) for w in src.once)
            lines.append(_braced("Q", words))
        if src.iterated:
            words = " ; ".join(_group_word_part(w, gens) for w in src.iterated)
            lines.append(_braced("R", words))
        for name, endo in src.endos:
            image = dict(endo.images)
            parts = []
            for s in gens:
                w = image[s]
                if w == ((s, 1),):
                    continue
                entry = f"{s} -> {_group_word_part(w, gens)}"
                parts.append(entry.rstrip())
            lines.append(_braced(f"endo {name}", " ; ".join(parts)))
    elif isinstance(src, Edt0lSystem):
        lines.append("source = edt0l")
        lines.extend(_system_lines(None, src))
    elif isinstance(src, Hdt0lSystem):
        lines.append("source = hdt0l")
        lines.extend(_system_lines(None, src))
    else:
        raise ValueError(f"cannot serialize presentation source {type(src).__name__}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------------- pc

Vec = Tuple[Tuple[int, int], ...]


def _render_vec(vec: Vec) -> str:
    if not vec:
        return "eps"
    parts = []
    for idx, exp in vec:
        name = f"g{idx + 1}"
        parts.append(name if exp == 1 else f"{name}^{exp}")
    return " ".join(parts)


def _parse_vec(lineno: int, text: str, n_gens: int) -> Vec:
    out: List[Tuple[int, int]] = []
    for token in text.split():
        name, k = _parse_token(lineno, token)
        if name == "eps":
            continue
        if not name.startswith("g") or not name[1:].isdigit():
            _fail(lineno, f"pc words use generators g1..g{n_gens}, got {token!r}")
        idx = int(name[1:]) - 1
        if not 0 <= idx < n_gens:
            _fail(lineno, f"generator {name!r} out of range")
        if k:
            out.append((idx, k))
    return tuple(out)


def parse_pc(text: str) -> PcPresentation:
    lines = _logical_lines(text)
    _require_header(lines, "[pc]")
    header_lineno = lines[0][0]
    keys = _KeyReader()
    gen_lines: List[Tuple[int, str]] = []
    pow_lines: List[Tuple[int, str]] = []
    conj_lines: List[Tuple[int, str]] = []
    def_lines: List[Tuple[int, str]] = []
    epi_lines: List[Tuple[int, str]] = []
    buckets = {
        "gen ": gen_lines,
        "pow ": pow_lines,
        "conj ": conj_lines,
        "def ": def_lines,
        "epi ": epi_lines,
    }
    for lineno, line in lines[1:]:
        for prefix, bucket in buckets.items():
            if line.startswith(prefix):
                bucket.append((lineno, line[len(prefix):]))
                break
        else:
            keys.add(lineno, line)
    _, cls = keys.take_int("class", header_lineno)
    keys.finish()
    n = len(gen_lines)
    weights = [0] * n
    orders = [0] * n
    seen = set()
    for lineno, rest in gen_lines:
        tokens = rest.split()
        if len(tokens) != 5 or tokens[1] != "weight" or tokens[3] != "order":
            _fail(lineno, "generator lines read `gen i weight w order o`")
        try:
            i, w, o = int(tokens[0]), int(tokens[2]), int(tokens[4])
        except ValueError:
            _fail(lineno, f"generator line fields must be integers: {rest!r}")
        if not 1 <= i <= n:
            _fail(lineno, f"generator index {i} out of range 1..{n}")
        if i in seen:
            _fail(lineno, f"duplicate generator {i}")
        seen.add(i)
        weights[i - 1], orders[i - 1] = w, o

    def split_colon(lineno, rest):
        head, colon, tail = rest.partition(":")
        if not colon:
            _fail(lineno, "expected `... : word`")
        return head.split(), tail

    powers = []
    for lineno, rest in pow_lines:
        head, tail = split_colon(lineno, rest)
        if len(head) != 1:
            _fail(lineno, "power lines read `pow i : word`")
        i = _int(lineno, head[0], "generator index")
        powers.append((i - 1, _parse_vec(lineno, tail, n)))
    conjugations = []
    for lineno, rest in conj_lines:
        head, tail = split_colon(lineno, rest)
        if len(head) != 2:
            _fail(lineno, "conjugation lines read `conj j i : word`")
        j = _int(lineno, head[0], "generator index")
        i = _int(lineno, head[1], "generator index")
        conjugations.append((j - 1, i - 1, _parse_vec(lineno, tail, n)))
    definitions: List[Optional[Tuple]] = [None] * n
    for lineno, rest in def_lines:
        head, tail = split_colon(lineno, rest)
        if len(head) != 1:
            _fail(lineno, "definition lines read `def i : ...`")
        i = _int(lineno, head[0], "generator index") - 1
        if not 0 <= i < n or definitions[i] is not None:
            _fail(lineno, f"bad or duplicate definition index {head[0]}")
        tokens = tail.split()
        if len(tokens) == 2 and tokens[0] == "img":
            definitions[i] = ("img", tokens[1])
        elif len(tokens) == 2 and tokens[0] == "pow":
            definitions[i] = ("pow", _int(lineno, tokens[1], "generator index") - 1)
        elif len(tokens) == 1 and tokens[0].startswith("[") and tokens[0].endswith("]"):
            inner = tokens[0][1:-1].split(",")
            if len(inner) != 2:
                _fail(lineno, f"commutator definition reads `[j,k]`: {tokens[0]!r}")
            definitions[i] = (
                "comm",
                _int(lineno, inner[0], "generator index") - 1,
                _int(lineno, inner[1], "generator index") - 1,
            )
        else:
            _fail(lineno, f"unknown definition {tail.strip()!r}")
    missing = [str(i + 1) for i, d in enumerate(definitions) if d is None]
    if missing:
        _fail(header_lineno, f"missing definitions for generators {', '.join(missing)}")
    marking = []
    epimorphism = []
    for lineno, rest in epi_lines:
        head, tail = split_colon(lineno, rest)
        if len(head) != 1:
            _fail(lineno, "epimorphism lines read `epi s : word`")
        marking.append(head[0])
        epimorphism.append((head[0], _parse_vec(lineno, tail, n)))
    try:
        return PcPresentation.make(
            weights,
            orders,
            powers,
            conjugations,
            definitions,
            marking,
            epimorphism,
            cls,
        )
    except ValueError as e:
        _fail(header_lineno, str(e))
    raise AssertionError("unreachable")


def write_pc(pc: PcPresentation) -> str:
    lines = ["[pc]", f"class = {pc.nilpotency_class}"]
    for i, (w, o) in enumerate(zip(pc.weights, pc.orders), start=1):
        lines.append(f"gen {i} weight {w} order {o}")
    for i, tail in pc.powers:
        lines.append(f"pow {i + 1} : {_render_vec(tail)}")
    for j, i, tail in pc.conjugations:
        lines.append(f"conj {j + 1} {i + 1} : {_render_vec(tail)}")
    for i, d in enumerate(pc.definitions, start=1):
        if d[0] == "img":
            lines.append(f"def {i} : img {d[1]}")
        elif d[0] == "comm":
            lines.append(f"def {i} : [{d[1] + 1},{d[2] + 1}]")
        else:
            lines.append(f"def {i} : pow {d[1] + 1}")
    for name, vec in pc.epimorphism:
        lines.append(f"epi {name} : {_render_vec(vec)}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- finite group


def parse_finite_group(text: str) -> FiniteGroup:
    """Parse a `[group]` block, either as a full multiplication table
    (`order = n` with `row i : ...` lines) or as permutation generators
    (`degree = d` with `perm ...` lines)."""
    lines = _logical_lines(text)
    _require_header(lines, "[group]")
    header_lineno = lines[0][0]
    keys = _KeyReader()
    rows: List[Tuple[int, str]] = []
    perms: List[Tuple[int, str]] = []
    for lineno, line in lines[1:]:
        if line.startswith("row "):
            rows.append((lineno, line[4:]))
        elif line.startswith("perm ") or line == "perm":
            perms.append((lineno, line[4:]))
        else:
            keys.add(lineno, line)
    order_kv = keys.take_optional("order")
    degree_kv = keys.take_optional("degree")
    keys.finish()
    if (order_kv is None) == (degree_kv is None):
        _fail(header_lineno, "a group block has either `order = n` or `degree = d`")

    def ints(lineno, text):
        try:
            return [int(tok) for tok in text.split()]
        except ValueError:
            _fail(lineno, f"expected integers, got {text!r}")

    try:
        if order_kv is not None:
            if perms:
                _fail(perms[0][0], "table groups take no perm lines")
            order_lineno, order_text = order_kv
            n = _int(order_lineno, order_text, "order")
            if n < 1:
                _fail(order_lineno, f"order must be positive, got {n}")
            table: List[Optional[List[int]]] = [None] * n
            for lineno, rest in rows:
                head, colon, tail = rest.partition(":")
                if not colon:
                    _fail(lineno, "row lines read `row i : entries`")
                i = _int(lineno, head.strip(), "row index")
                if not 0 <= i < n or table[i] is not None:
                    _fail(lineno, f"bad or duplicate row index {head.strip()!r}")
                table[i] = ints(lineno, tail)
            missing = [str(i) for i, row in enumerate(table) if row is None]
            if missing:
                _fail(header_lineno, f"missing rows {', '.join(missing)}")
            return FiniteGroup.make(table)
        if rows:
            _fail(rows[0][0], "permutation groups take no row lines")
        degree_lineno, degree_text = degree_kv
        degree = _int(degree_lineno, degree_text, "degree")
        images = [tuple(ints(lineno, rest)) for lineno, rest in perms]
        return FiniteGroup.from_permutations(degree, images)
    except FormatError:
        raise
    except ValueError as e:
        _fail(header_lineno, str(e))
    raise AssertionError("unreachable")


def write_finite_group(g: FiniteGroup) -> str:
    lines = ["[group]", f"order = {g.order}"]
    for i, row in enumerate(g.table):
        lines.append(f"row {i} :" + "".join(f" {v}" for v in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------- machines


def parse_machines(text: str) -> MachineList:
    """Parse a file of consecutive `[tm]` blocks into a machine list."""
    lines = _logical_lines(text)
    if not lines:
        raise FormatError("line 1: empty input")
    starts = [pos for pos, (_, line) in enumerate(lines) if line.startswith("[")]
    if not starts or starts[0] != 0:
        _fail(lines[0][0], "expected a [tm] block header")
    machines = []
    for which, pos in enumerate(starts):
        end = starts[which + 1] if which + 1 < len(starts) else len(lines)
        machines.append(_parse_tm_lines(lines[pos:end]))
    return MachineList.make(machines)


def _parse_tm_lines(lines: List[Tuple[int, str]]) -> TuringMachine:
    _require_header(lines, "[tm]")
    header_lineno = lines[0][0]
    keys = _KeyReader()
    raw_rules: List[Tuple[int, str]] = []
    for lineno, line in lines[1:]:
        if line.startswith("rule "):
            raw_rules.append((lineno, line[5:]))
        else:
            keys.add(lineno, line)
    _, n_states = keys.take_int("states", header_lineno)
    _, start = keys.take_int("start", header_lineno)
    _, halt = keys.take_int("halt", header_lineno)
    keys.finish()
    rules = []
    for lineno, rest in raw_rules:
        lhs, arrow, rhs = rest.partition("->")
        if not arrow:
            _fail(lineno, "rule lines read `rule q s -> q' s' L|R`")
        lhs_tokens, rhs_tokens = lhs.split(), rhs.split()
        if len(lhs_tokens) != 2 or len(rhs_tokens) != 3:
            _fail(lineno, "rule lines read `rule q s -> q' s' L|R`")
        try:
            q, q2 = int(lhs_tokens[0]), int(rhs_tokens[0])
        except ValueError:
            _fail(lineno, f"rule states must be integers in {rest!r}")
        rules.append((q, lhs_tokens[1], q2, rhs_tokens[1], rhs_tokens[2]))
    try:
        return TuringMachine.make(n_states, start, halt, tuple(rules))
    except ValueError as e:
        _fail(header_lineno, str(e))
    raise AssertionError("unreachable")


def write_machines(ms: MachineList) -> str:
    blocks = []
    for m in ms.machines:
        lines = [
            "[tm]",
            f"states = {m.n_states}",
            f"start = {m.start}",
            f"halt = {m.halt}",
        ]
        lines.extend(
            f"rule {q} {sym} -> {q2} {sym2} {move}" for q, sym, q2, sym2, move in m.rules
        )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
