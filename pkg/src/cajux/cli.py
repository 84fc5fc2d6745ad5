"""Command-line interface.

Exit codes: 0 success (or a CA exists), 1 verification failed, 2 unreadable
input or bad arguments, 3 budget exhausted, 4 missing libraries.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import can_bound
from .budget import Budget
from .canonical import canonical_minimum
from .core import Params, find_uncovered
from .errors import BudgetExhausted, FormatError, InvalidArgument, MissingLibraryError
from .generator import generate_with_stats
from .search import BUDGET_EXHAUSTED, construct, valid_multisets
from .store import (
    RunManifest,
    content_hash,
    dumps_ca,
    dumps_library,
    file_hash,
    find_libraries,
    library_filename,
    read_ca,
    result_filename,
    write_manifest,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_MISSING = 4

log = logging.getLogger("cajux")


def _add_params(parser: argparse.ArgumentParser, names: str) -> None:
    parser.add_argument("params", nargs="*", type=int, metavar=names.upper(),
                        help=f"positional alternative to the flags, in the order {names}")
    for name in names.split():
        parser.add_argument(f"--{name.lower()}", type=int, dest=f"p_{name}")


def _get_params(args, names: str) -> list[int]:
    names = names.split()
    pos = list(args.params)
    if pos and len(pos) != len(names):
        raise InvalidArgument(f"expected {len(names)} positional values ({' '.join(names)}), got {len(pos)}")
    values = []
    for i, name in enumerate(names):
        flag = getattr(args, f"p_{name}")
        if pos and flag is not None and flag != pos[i]:
            raise InvalidArgument(f"conflicting values for {name}: {pos[i]} and {flag}")
        value = pos[i] if pos else flag
        if value is None:
            raise InvalidArgument(f"missing parameter {name}")
        values.append(value)
    return values


def _budget(args) -> Budget | None:
    if args.time_budget is None and args.node_budget is None:
        return None
    return Budget(seconds=args.time_budget, nodes=args.node_budget)


def _write(path: Path, text: str) -> str:
    path.write_text(text, encoding="utf-8", newline="\n")
    return content_hash(text)


def cmd_verify(args) -> int:
    A = read_ca(args.file)
    s = args.strength if args.strength is not None else A.t
    miss = find_uncovered(A, s)
    if miss is None:
        print(f"strength {s}: PASS")
        return EXIT_OK
    cols, tup = miss
    print(f"strength {s}: FAIL columns {' '.join(map(str, cols))} miss tuple {' '.join(map(str, tup))}")
    return EXIT_FAIL


def cmd_canon(args) -> int:
    A = read_ca(args.file)
    form = canonical_minimum(A)
    text = dumps_ca(form.array)
    status = "already canonical" if form.array == A else "canonicalized"
    if args.out is None:
        sys.stdout.write(text)
        print(status, file=sys.stderr)
    else:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        print(status)
    return EXIT_OK


def cmd_multisets(args) -> int:
    N, t, k, v = _get_params(args, "n t k v")
    for ms in valid_multisets(N, t, k, v):
        print(ms)
    return EXIT_OK


def cmd_bounds(args) -> int:
    t, k, v = _get_params(args, "t k v")
    print(can_bound(t, k, v))
    return EXIT_OK


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    p = Params(*_get_params(args, "n t k v"))
    out = _out_dir(args)
    start = time.monotonic()
    manifest_path = out / f"generate_{p.N}_{p.t}_{p.k}_{p.v}.manifest"
    try:
        lib, stats = generate_with_stats(p, workers=args.workers, budget=_budget(args), progress=args.progress)
    except BudgetExhausted as exc:
        name = library_filename(p, complete=False)
        partial = exc.partial
        digest = _write(out / name, dumps_library(partial))
        write_manifest(RunManifest(
            command="generate", params=p, verdict=BUDGET_EXHAUSTED, results={name: digest},
            result_count=len(partial), stats=exc.stats.as_dict() if exc.stats else {},
            wall_time=time.monotonic() - start), manifest_path)
        print(f"budget exhausted: {exc}", file=sys.stderr)
        print(f"partial library (not authoritative): {out / name}", file=sys.stderr)
        return EXIT_BUDGET
    name = library_filename(p)
    digest = _write(out / name, dumps_library(lib))
    write_manifest(RunManifest(
        command="generate", params=p, verdict="exists" if len(lib) else "nonexistent",
        results={name: digest}, result_count=len(lib), stats=stats.as_dict(),
        wall_time=time.monotonic() - start), manifest_path)
    print(len(lib))
    return EXIT_OK


def cmd_search(args) -> int:
    N, tp, kp, v = _get_params(args, "n t k v")
    p = Params(N, tp, kp, v)
    if tp < 2:
        raise InvalidArgument("search needs strength t >= 2")
    t, k = tp - 1, kp - 1
    multisets = valid_multisets(N, t, k, v)
    sizes = sorted({n for ms in multisets for n in ms.sizes})
    libdir = Path(args.libs) if args.libs else Path.cwd()
    libs, paths = find_libraries(libdir, sizes, t, k, v, validate=args.validate) if sizes else ({}, {})
    out = _out_dir(args)
    start = time.monotonic()
    inputs = {paths[n].name: file_hash(paths[n]) for n in sorted(paths)}
    manifest = RunManifest(command="search", params=p, verdict="", inputs=inputs,
                           multisets=[str(ms) for ms in multisets])
    print(f"multisets: {len(multisets)}")
    for ms in multisets:
        print(f"multiset: {ms}")
    try:
        result = construct(N, tp, kp, v, libs, workers=args.workers, budget=_budget(args),
                           allow_partial=args.allow_partial, progress=args.progress)
    except MissingLibraryError as exc:
        print(f"missing libraries in {libdir}; required sizes: {' '.join(map(str, exc.sizes))}", file=sys.stderr)
        for n in exc.sizes:
            print(f"  {library_filename(Params(n, t, k, v))}", file=sys.stderr)
        return EXIT_MISSING
    except BudgetExhausted as exc:
        partial = exc.partial
        manifest.results = _write_results(out, p, partial.members if partial else [])
        manifest.result_count = len(manifest.results)
        manifest.verdict = BUDGET_EXHAUSTED
        manifest.stats = exc.stats.as_dict() if exc.stats else {}
        manifest.wall_time = time.monotonic() - start
        write_manifest(manifest, out / f"search_{N}_{tp}_{kp}_{v}.manifest")
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    manifest.results = _write_results(out, p, result.members)
    manifest.result_count = len(result.members)
    manifest.verdict = result.verdict
    manifest.stats = result.stats.as_dict()
    manifest.wall_time = time.monotonic() - start
    write_manifest(manifest, out / f"search_{N}_{tp}_{kp}_{v}.manifest")
    print(f"tuples: {result.stats.tuples}")
    print(f"results: {len(result.members)}")
    print(f"verdict: {result.verdict}")
    return EXIT_OK


def _write_results(out: Path, p: Params, members) -> dict[str, str]:
    results = {}
    for i, m in enumerate(members):
        name = result_filename(p, i)
        results[name] = _write(out / name, dumps_ca(m.array))
    return results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cajux", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--progress", type=float, metavar="SECS",
                        help="log progress to stderr every SECS seconds")
    common.add_argument("-q", "--quiet", action="store_true", help="only log errors")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--out", metavar="DIR", help="output directory (default: current directory)")
    run.add_argument("--workers", type=int, default=1, metavar="W")
    run.add_argument("--time-budget", type=float, metavar="SECS")
    run.add_argument("--node-budget", type=int, metavar="COUNT")

    p = sub.add_parser("verify", parents=[common], help="check the strength of a CA file")
    p.add_argument("file")
    p.add_argument("strength", nargs="?", type=int, help="strength to test (default: the header's t)")
    p.add_argument("--t", "--strength", type=int, dest="strength_flag")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("canon", parents=[common], help="write the canonical minimum of a CA file")
    p.add_argument("file")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("generate", parents=[common, run], help="generate all non-isomorphic CA(N;t,k,v)")
    _add_params(p, "n t k v")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("search", parents=[common, run],
                       help="search for CA(N;t,k,v) by juxtaposing libraries of CA(N_i;t-1,k-1,v)")
    _add_params(p, "n t k v")
    p.add_argument("--libs", metavar="DIR", help="directory with library archives (default: current directory)")
    p.add_argument("--allow-partial", action="store_true",
                   help="run with missing libraries; an empty result is then not a proof")
    p.add_argument("--validate", action="store_true", help="re-check library members for minimality")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("multisets", parents=[common], help="list valid block-size multisets")
    _add_params(p, "n t k v")
    p.set_defaults(func=cmd_multisets)

    p = sub.add_parser("bounds", parents=[common], help="exact CAN(t,k,v) or a lower bound")
    _add_params(p, "t k v")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "strength_flag", None) is not None:
        if args.strength is not None and args.strength != args.strength_flag:
            parser.error("conflicting strength values")
        args.strength = args.strength_flag
    level = logging.ERROR if args.quiet else logging.INFO if args.progress is not None else logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"{getattr(args, 'file', 'input')}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidArgument, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
