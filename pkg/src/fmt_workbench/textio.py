"""Plain-text structure files.

Format::

    vocab le/2 S/2 P/1 ; c d
    universe 18
    rel le: (1,1) (1,2) ...
    rel P: (5) (14)
    const c = 1

``universe N`` means elements ``1..N``. A universe that is not an initial
segment is written as an explicit list, ``universe {1 5 18}``. ``#`` starts
a comment.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Union

from .errors import StructureError
from .structures import Structure, Vocabulary

_SYMBOL = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)/(\d+)$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_ROW = re.compile(r"\(([^()]*)\)")


class StructureFormatError(StructureError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _parse_vocab(body, lineno):
    rel_part, _, const_part = body.partition(";")
    relations = []
    for token in rel_part.split():
        m = _SYMBOL.match(token)
        if not m:
            raise StructureFormatError(f"bad relation symbol {token!r}", lineno)
        relations.append((m.group(1), int(m.group(2))))
    constants = const_part.split()
    for c in constants:
        if not _IDENT.match(c):
            raise StructureFormatError(f"bad constant symbol {c!r}", lineno)
    return Vocabulary(tuple(relations), tuple(constants))


def loads(text: str) -> Structure:
    vocab = None
    universe = None
    relations = {}
    constants = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = " ".join(raw.split("#", 1)[0].split())
        if not line:
            continue
        keyword, _, body = line.partition(" ")
        body = body.strip()
        if keyword == "vocab":
            if vocab is not None:
                raise StructureFormatError("duplicate vocab line", lineno)
            vocab = _parse_vocab(body, lineno)
            continue
        if vocab is None:
            raise StructureFormatError("the first line must declare the vocabulary", lineno)
        if keyword == "universe":
            if body.startswith("{"):
                if not body.endswith("}"):
                    raise StructureFormatError("unterminated universe list", lineno)
                try:
                    universe = [int(x) for x in body[1:-1].replace(",", " ").split()]
                except ValueError:
                    raise StructureFormatError(f"bad universe list {body!r}", lineno) from None
            else:
                try:
                    size = int(body)
                except ValueError:
                    raise StructureFormatError(f"bad universe size {body!r}", lineno) from None
                universe = range(1, size + 1)
        elif keyword == "rel":
            name, colon, rows = body.partition(":")
            name = name.strip()
            if not colon or not vocab.has_relation(name):
                raise StructureFormatError(f"unknown relation in {line!r}", lineno)
            if name in relations:
                raise StructureFormatError(f"relation {name} listed twice", lineno)
            parsed = []
            leftover = _ROW.sub("", rows).strip()
            if leftover:
                raise StructureFormatError(f"unexpected text {leftover!r}", lineno)
            for m in _ROW.finditer(rows):
                try:
                    parsed.append(tuple(int(x) for x in m.group(1).split(",")))
                except ValueError:
                    raise StructureFormatError(f"bad tuple ({m.group(1)})", lineno) from None
            relations[name] = parsed
        elif keyword == "const":
            name, eq, value = body.partition("=")
            name = name.strip()
            if not eq or not vocab.has_constant(name):
                raise StructureFormatError(f"unknown constant in {line!r}", lineno)
            try:
                constants[name] = int(value)
            except ValueError:
                raise StructureFormatError(f"bad constant value {value.strip()!r}", lineno) from None
        else:
            raise StructureFormatError(f"unknown keyword {keyword!r}", lineno)
    if vocab is None:
        raise StructureFormatError("missing vocab line")
    if universe is None:
        raise StructureFormatError("missing universe line")
    try:
        return Structure(vocab, universe, relations, constants)
    except StructureError as exc:
        raise StructureFormatError(str(exc)) from exc


def dumps(S: Structure) -> str:
    rels = " ".join(f"{r}/{a}" for r, a in S.vocab.relations)
    consts = " ".join(S.vocab.constants)
    lines = [f"vocab {rels} ; {consts}".rstrip()]
    if S.elements == tuple(range(1, len(S) + 1)):
        lines.append(f"universe {len(S)}")
    else:
        lines.append("universe {" + " ".join(map(str, S.elements)) + "}")
    for name, _ in S.vocab.relations:
        rows = sorted(S.relations[name])
        lines.append(f"rel {name}: " + " ".join("(" + ",".join(map(str, r)) + ")" for r in rows))
    for c in S.vocab.constants:
        lines.append(f"const {c} = {S.constants[c]}")
    return "\n".join(lines) + "\n"


def load(path: Union[str, Path]) -> Structure:
    return loads(Path(path).read_text())


def dump(S: Structure, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(S))
