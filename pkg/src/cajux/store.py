"""Text formats for single arrays, libraries and run manifests.

Single array::

    CA N t k v
    <N lines of k space-separated symbols>

Library of ``count`` members (class minima in lex order), bodies separated
by one blank line::

    CALIB count N t k v
    <member 1 rows>

    <member 2 rows>

Manifests are ``key = value`` lines in a fixed key order. Files end with a
newline and carry no trailing whitespace.
"""

from __future__ import annotations

import hashlib
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .canonical import CanonicalForm, minimal_states
from .core import CoveringArray, Params, find_uncovered
from .errors import FormatError, InvalidArgument
from .generator import CaLibrary

HASH_ALGORITHM = "sha256"
CA_SUFFIX = ".ca"
LIBRARY_SUFFIX = ".calib"
PARTIAL_SUFFIX = ".partial"


def content_hash(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()


def file_hash(path) -> str:
    return content_hash(Path(path).read_bytes())


def _body(cells: np.ndarray) -> list[str]:
    return [" ".join(map(str, row)) for row in cells.tolist()]


def dumps_ca(A: CoveringArray) -> str:
    return "\n".join([f"CA {A.N} {A.t} {A.k} {A.v}"] + _body(A.cells)) + "\n"


def dumps_library(L: CaLibrary) -> str:
    p = L.params
    lines = [f"CALIB {len(L)} {p.N} {p.t} {p.k} {p.v}"]
    for i, m in enumerate(L.members):
        if i:
            lines.append("")
        lines.extend(_body(m.array.cells))
    return "\n".join(lines) + "\n"


def library_fingerprint(L: CaLibrary) -> str:
    return content_hash(dumps_library(L))


def _ints(line: str, lineno: int, what: str, col: int = 1) -> list[int]:
    out = []
    for tok in line.split(" "):
        if not tok.isdigit():
            raise FormatError(f"expected a non-negative integer in {what}, got {tok!r}", lineno, col)
        out.append(int(tok))
        col += len(tok) + 1
    return out


def _check_layout(line: str, lineno: int) -> None:
    if line != line.strip() or "  " in line or "\t" in line:
        raise FormatError("fields must be separated by single spaces without surrounding whitespace", lineno)


def _header(line: str, lineno: int, tag: str, nfields: int) -> list[int]:
    _check_layout(line, lineno)
    parts = line.split(" ")
    if parts[0] != tag:
        raise FormatError(f"expected header starting with {tag!r}", lineno, 1)
    if len(parts) != nfields + 1:
        raise FormatError(f"{tag} header needs {nfields} numbers, got {len(parts) - 1}", lineno)
    return _ints(" ".join(parts[1:]), lineno, f"{tag} header", len(tag) + 2)


def _params(values, lineno: int) -> Params:
    try:
        return Params(*values)
    except InvalidArgument as exc:
        raise FormatError(str(exc), lineno) from None


def _rows(lines: list[str], first: int, p: Params) -> np.ndarray:
    """Parse ``p.N`` body lines; ``first`` is the 1-based number of the first."""
    cells = np.zeros((p.N, p.k), dtype=np.uint8)
    for r, line in enumerate(lines):
        lineno = first + r
        if not line:
            raise FormatError("unexpected blank line inside an array body", lineno)
        _check_layout(line, lineno)
        values = _ints(line, lineno, "row")
        if len(values) != p.k:
            raise FormatError(f"row has {len(values)} symbols, expected {p.k}", lineno)
        col = 1
        for c, x in enumerate(values):
            if x >= p.v:
                raise FormatError(f"symbol {x} in cell ({r + 1}, {c + 1}) is out of range for v={p.v}", lineno, col)
            col += len(str(x)) + 1
        cells[r] = values
    return cells


def _split_lines(text: str) -> list[str]:
    if not text:
        raise FormatError("empty input", 1)
    if not text.endswith("\n"):
        raise FormatError("missing final newline", text.count("\n") + 1)
    return text[:-1].split("\n")


def loads_ca(text: str) -> CoveringArray:
    lines = _split_lines(text)
    p = _params(_header(lines[0], 1, "CA", 4), 1)
    body = lines[1:]
    if len(body) != p.N:
        raise FormatError(f"header declares {p.N} rows but the body has {len(body)}", 1)
    return CoveringArray(_rows(body, 2, p), p.v, p.t)


def loads_library(text: str, *, validate: bool = False, complete: bool = True) -> CaLibrary:
    """Parse a library archive.

    Member strength, order and uniqueness are always checked; ``validate``
    also requires every member to be its own class minimum, which rules out
    isomorphic duplicates.
    """
    lines = _split_lines(text)
    count, *values = _header(lines[0], 1, "CALIB", 5)
    p = _params(values, 1)
    expected = 1 + count * p.N + max(0, count - 1)
    if len(lines) != expected:
        raise FormatError(f"{count} members of {p.N} rows need {expected} lines, found {len(lines)}", len(lines))
    members = []
    pos = 1
    for m in range(count):
        if m:
            if lines[pos] != "":
                raise FormatError("members must be separated by one blank line", pos + 1)
            pos += 1
        cells = _rows(lines[pos : pos + p.N], pos + 1, p)
        A = CoveringArray(cells, p.v, p.t)
        miss = find_uncovered(A, p.t)
        if miss is not None:
            raise FormatError(f"member {m + 1} is not of strength {p.t}: columns {miss[0]} miss {miss[1]}", pos + 1)
        if validate and minimal_states(cells, p.v) is None:
            raise FormatError(f"member {m + 1} is not the minimum of its isomorphism class", pos + 1)
        if members and A.key() <= members[-1].key:
            what = "duplicates" if A.key() == members[-1].key else "is out of lex order after"
            raise FormatError(f"member {m + 1} {what} member {m}", pos + 1)
        members.append(CanonicalForm(A))
        pos += p.N
    return CaLibrary(p, tuple(members), complete)


def _write_text(destination, text: str) -> None:
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text(encoding="utf-8")


def write_ca(A: CoveringArray, destination) -> None:
    _write_text(destination, dumps_ca(A))


def read_ca(source) -> CoveringArray:
    return loads_ca(_read_text(source))


def write_library(L: CaLibrary, destination) -> None:
    _write_text(destination, dumps_library(L))


def read_library(source, *, validate: bool = False) -> CaLibrary:
    """Read a library; files named ``*.partial`` load as incomplete."""
    complete = not (isinstance(source, (str, os.PathLike)) and str(source).endswith(PARTIAL_SUFFIX))
    return loads_library(_read_text(source), validate=validate, complete=complete)


def library_filename(p: Params, complete: bool = True) -> str:
    name = f"CA_{p.N}_{p.t}_{p.k}_{p.v}{LIBRARY_SUFFIX}"
    return name if complete else name + PARTIAL_SUFFIX


def result_filename(p: Params, index: int) -> str:
    return f"CA_{p.N}_{p.t}_{p.k}_{p.v}_{index:04d}{CA_SUFFIX}"


def find_libraries(directory, sizes: Iterable[int], t: int, k: int, v: int, *,
                   validate: bool = False) -> tuple[dict[int, CaLibrary], dict[int, Path]]:
    """Load the complete libraries present in ``directory`` for the given sizes."""
    libs, paths = {}, {}
    for n in sorted(set(sizes)):
        path = Path(directory) / library_filename(Params(n, t, k, v))
        if path.is_file():
            libs[n] = read_library(path, validate=validate)
            paths[n] = path
    return libs, paths


@dataclass
class RunManifest:
    """Everything needed to audit or repeat one run."""

    command: str
    params: Params
    verdict: str
    tool_version: str = ""
    inputs: dict[str, str] = field(default_factory=dict)  # file name -> hash
    multisets: list[str] = field(default_factory=list)
    results: dict[str, str] = field(default_factory=dict)  # file name -> hash
    result_count: int = 0
    stats: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def lines(self) -> list[str]:
        if not self.tool_version:
            from . import __version__
            self.tool_version = __version__
        p = self.params
        out = [
            ("tool", "cajux"),
            ("tool_version", self.tool_version),
            ("command", self.command),
            ("N", p.N), ("t", p.t), ("k", p.k), ("v", p.v),
            ("hash_algorithm", HASH_ALGORITHM),
            ("input_count", len(self.inputs)),
        ]
        out += [(f"input.{name}", digest) for name, digest in sorted(self.inputs.items())]
        out.append(("multisets", "; ".join(self.multisets) if self.multisets else "none"))
        out.append(("result_count", self.result_count))
        out += [(f"result.{name}", digest) for name, digest in sorted(self.results.items())]
        out += [(f"stats.{key}", value) for key, value in self.stats.items() if key != "wall_time"]
        out.append(("verdict", self.verdict))
        out.append(("wall_time", f"{self.wall_time:.3f}"))
        return [f"{key} = {value}" for key, value in out]


def write_manifest(m: RunManifest, destination) -> None:
    _write_text(destination, "\n".join(m.lines()) + "\n")


def read_manifest(source) -> dict[str, str]:
    """Parse a manifest into an ordered ``key -> value`` dict."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(io.StringIO(_read_text(source)), start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise FormatError("expected 'key = value'", lineno)
        out[key] = value
    return out
