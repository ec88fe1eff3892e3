"""
ETL-text v1: concrete syntax, parser, pretty-printer and target manifest.

Precedence, tightest first: ! F G, U (right-assoc), &, |. Unicode aliases
¬ ◊ ◇ □ ∧ ∨ ≤ ≥ are accepted by the lexer.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
    VisitError,
)
from loguru import logger
from pydantic import ValidationError

from .exceptions import (
    ETLError,
    ManifestIOError,
    ManifestSchemaError,
    SpecSyntaxError,
    UnresolvedIdentifierError,
)
from .logic import (
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    Not,
    Or,
    Predicate,
    Sense,
    TargetRef,
    TrueFormula,
    Until,
)
from .schemas import ManifestFile
from .utils import load_embedding

GRAMMAR_VERSION = "ETL-text v1"

GRAMMAR = r"""
?start: disj

?disj: conj
     | disj _OR conj              -> or_

?conj: until
     | conj _AND until            -> and_

?until: unary
      | unary _UNTIL until        -> until

?unary: _NOT unary                -> not_
      | _EVENTUALLY unary         -> eventually
      | _ALWAYS unary             -> always
      | atom

?atom: "(" disj ")"
     | _TRUE                      -> true
     | "dist" "(" "z" "," IDENT ")" CMP [NUMBER]   -> pred

_OR: "|" | "∨"
_AND: "&" | "∧"
_UNTIL: "U"
_NOT: "!" | "¬"
_EVENTUALLY: "F" | "◊" | "◇"
_ALWAYS: "G" | "□"
_TRUE: "true"
CMP: "<=" | ">=" | "<" | ">" | "≤" | "≥"
IDENT: /[A-Za-z_][A-Za-z0-9_]*/

%import common.NUMBER
%import common.WS
%ignore WS
"""

PARSER = Lark(GRAMMAR, parser="lalr")

REACH_COMPARATORS = {"<=", "<", "≤"}

TERMINAL_NAMES = {
    "_OR": "'|'",
    "_AND": "'&'",
    "_UNTIL": "'U'",
    "_NOT": "'!'",
    "_EVENTUALLY": "'F'",
    "_ALWAYS": "'G'",
    "_TRUE": "'true'",
    "LPAR": "'('",
    "RPAR": "')'",
    "COMMA": "','",
    "DIST": "'dist'",
    "Z": "'z'",
    "CMP": "comparison",
    "IDENT": "identifier",
    "NUMBER": "number",
    "$END": "end of input",
}


@dataclass(frozen=True)
class ManifestEntry:
    target: TargetRef
    default_threshold: Optional[float] = None


@dataclass(frozen=True)
class Manifest:
    entries: Dict[str, ManifestEntry] = field(default_factory=dict)

    def resolve(self, name: str) -> ManifestEntry:
        try:
            return self.entries[name]
        except KeyError:
            raise UnresolvedIdentifierError(name)

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def targets(self) -> Dict[str, TargetRef]:
        return {name: entry.target for name, entry in self.entries.items()}

    @classmethod
    def from_targets(
        cls,
        targets: Iterable[TargetRef],
        defaults: Optional[Mapping[str, float]] = None,
    ) -> "Manifest":
        defaults = defaults or {}
        entries = {}
        for target in targets:
            if target.name in entries:
                raise ManifestSchemaError(f"duplicate target name '{target.name}'")
            entries[target.name] = ManifestEntry(target, defaults.get(target.name))
        return cls(entries)


@dataclass(frozen=True)
class SpecSource:
    text: str
    manifest: Manifest


def load_manifest(path: Union[str, Path]) -> Manifest:
    """Read a `{"targets": {name: {"file", "metric", "threshold"?}}}` manifest."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestIOError(f"cannot read manifest {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError(f"manifest {path} is not valid JSON: {exc}")

    try:
        document = ManifestFile.parse_obj(raw)
    except ValidationError as exc:
        raise ManifestSchemaError(f"manifest {path} does not match the schema: {exc}")

    entries = {}
    for name, spec in document.targets.items():
        embedding_path = Path(spec.file)
        if not embedding_path.is_absolute():
            embedding_path = path.parent / embedding_path
        embedding = load_embedding(embedding_path)
        target = TargetRef(name=name, embedding=embedding, metric=spec.metric, role=spec.role or "")
        entries[name] = ManifestEntry(target, spec.threshold)
    logger.debug("loaded manifest {} with {} targets", path, len(entries))
    return Manifest(entries)


def _position(token: Token):
    return getattr(token, "line", None), getattr(token, "column", None)


@v_args(inline=True)
class _FormulaBuilder(Transformer):
    def __init__(self, manifest: Manifest):
        super().__init__()
        self.manifest = manifest

    def or_(self, left, right):
        return Or(left, right)

    def and_(self, left, right):
        return And(left, right)

    def until(self, left, right):
        return Until(left, right)

    def not_(self, child):
        return Not(child)

    def eventually(self, child):
        return Eventually(child)

    def always(self, child):
        return Always(child)

    def true(self):
        return TRUE

    def pred(self, ident: Token, cmp: Token, number: Optional[Token]):
        name = str(ident)
        if name not in self.manifest:
            line, column = _position(ident)
            raise UnresolvedIdentifierError(name, line, column)
        entry = self.manifest.resolve(name)
        if number is None:
            if entry.default_threshold is None:
                line, column = _position(cmp)
                raise SpecSyntaxError(
                    f"target '{name}' has no default threshold; write one after '{cmp}'",
                    line,
                    column,
                )
            threshold = entry.default_threshold
        else:
            threshold = float(number)
            if not math.isfinite(threshold):
                line, column = _position(number)
                raise SpecSyntaxError(f"threshold {number} is not a finite number", line, column)
        sense = Sense.REACH if str(cmp) in REACH_COMPARATORS else Sense.AVOID
        return Predicate(entry.target, threshold, sense)


def _end_position(text: str):
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _readable(expected: Iterable[str]):
    return {TERMINAL_NAMES.get(name, name) for name in expected}


def _syntax_error(text: str, exc: UnexpectedInput) -> SpecSyntaxError:
    line, column = getattr(exc, "line", -1), getattr(exc, "column", -1)
    if line is None or line < 1:
        line, column = _end_position(text)
    if isinstance(exc, UnexpectedCharacters):
        return SpecSyntaxError(f"unexpected character {exc.char!r}", line, column, _readable(exc.allowed or ()))
    if isinstance(exc, UnexpectedToken):
        found = "end of input" if exc.token.type == "$END" else repr(str(exc.token))
        return SpecSyntaxError(f"unexpected {found}", line, column, _readable(exc.expected or ()))
    if isinstance(exc, UnexpectedEOF):
        return SpecSyntaxError("unexpected end of input", line, column, _readable(exc.expected or ()))
    return SpecSyntaxError(str(exc).splitlines()[0] if str(exc) else "syntax error", line, column)


def parse(src: SpecSource) -> Formula:
    """Parse ETL-text into a formula tree, resolving names against the manifest."""
    text = src.text
    try:
        tree = PARSER.parse(text)
    except UnexpectedInput as exc:
        raise _syntax_error(text, exc)
    try:
        formula = _FormulaBuilder(src.manifest).transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, ETLError):
            raise exc.orig_exc
        if isinstance(exc.orig_exc, RecursionError):
            raise SpecSyntaxError("formula nests too deeply", 1, 1)
        raise
    except RecursionError:
        raise SpecSyntaxError("formula nests too deeply", 1, 1)
    logger.debug("parsed spec {!r}", text)
    return formula


def parse_spec(text: str, manifest: Manifest) -> Formula:
    return parse(SpecSource(text, manifest))


def _threshold_text(value: float) -> str:
    # repr is the shortest string that round-trips a float exactly
    return repr(float(value))


def _operand(f: Formula) -> str:
    return f"({pretty(f)})"


def pretty(f: Formula) -> str:
    """Canonical, fully parenthesised text that re-parses to an equal tree."""
    if isinstance(f, Predicate):
        op = "<=" if f.sense == Sense.REACH else ">"
        return f"(dist(z, {f.target.name}) {op} {_threshold_text(f.threshold)})"
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, Not):
        return f"! {_operand(f.child)}"
    if isinstance(f, Eventually):
        return f"F {_operand(f.child)}"
    if isinstance(f, Always):
        return f"G {_operand(f.child)}"
    if isinstance(f, And):
        return f"{_operand(f.left)} & {_operand(f.right)}"
    if isinstance(f, Or):
        return f"{_operand(f.left)} | {_operand(f.right)}"
    if isinstance(f, Until):
        return f"{_operand(f.left)} U {_operand(f.right)}"
    raise TypeError(f"cannot print {type(f).__name__}")