"""Command-line entry point: spaces -> build -> verify -> quotient -> report.

Exit codes: 0 success, 1 failed checks, 2 usage errors, 3 invalid input or
corrupted state.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .axioms import SUITES, Ranges, run_suites
from .coalgebra import AlgebraError, CoalgebraTower, build_tower, load_algebra, validate_algebra
from .funspaces import KINDS, space_basis
from .quotient import CharacterError, augmentation_character, load_character, quotient_piece
from .vertexbuild import VertexTruncation

log = logging.getLogger("ozva")

EXIT_OK, EXIT_CHECKS, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


class StateError(RuntimeError):
    """The state directory is missing a file or a file does not match its recorded hash."""


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# -- state directory ---------------------------------------------------------------------------

class StateDir:
    """``manifest`` plus ``tower/``, ``truncation/`` and ``reports/``; every file is hashed in the manifest."""

    def __init__(self, root: Path):
        self.root = Path(root)

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest"

    def manifest(self) -> dict:
        if not self.manifest_path.exists():
            raise StateError("no manifest in %s" % self.root)
        return json.loads(self.manifest_path.read_text())

    def write(self, rel: str, doc) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = _dump(doc).encode()
        path.write_bytes(data)
        man = self.manifest() if self.manifest_path.exists() else {"files": {}}
        man["files"][rel] = _sha256(data)
        self.manifest_path.write_text(_dump(man))

    def read(self, rel: str):
        files = self.manifest()["files"]
        if rel not in files:
            raise StateError("%s is not recorded in the manifest" % rel)
        path = self.root / rel
        if not path.exists():
            raise StateError("missing state file %s" % path)
        data = path.read_bytes()
        if _sha256(data) != files[rel]:
            raise StateError("hash mismatch for %s" % path)
        return json.loads(data)

    def has(self, rel: str) -> bool:
        return self.manifest_path.exists() and rel in self.manifest()["files"]

    def verify_all(self) -> None:
        for rel in sorted(self.manifest()["files"]):
            self.read(rel)


def load_state(root: Path) -> tuple[StateDir, CoalgebraTower, dict]:
    state = StateDir(root)
    state.verify_all()
    tower = CoalgebraTower.from_json(state.read("tower/tower.json"))
    config = state.read("truncation/config.json")
    return state, tower, config


# -- commands ----------------------------------------------------------------------------------

def cmd_spaces(args) -> int:
    lengths = [args.l] if args.l is not None else list(range(2, args.max_l + 1))
    dims = {}
    for l in lengths:
        sp = space_basis(l, args.kind)
        dims[str(l)] = sp.dim
        if args.l is not None:
            print("dim = %d" % sp.dim)
            if args.basis:
                for k, f in enumerate(sp.basis):
                    print("  [%d] %s" % (k, f))
        else:
            print("l = %d: dim = %d" % (l, sp.dim))
    if args.state:
        state = StateDir(Path(args.state))
        key = "reports/spaces_%s.json" % args.kind
        prev = state.read(key) if state.has(key) else {}
        prev.update(dims)
        state.write(key, prev)
    return EXIT_OK


def cmd_build(args) -> int:
    try:
        alg = load_algebra(Path(args.algebra))
        validate_algebra(alg)
    except (AlgebraError, OSError, json.JSONDecodeError) as e:
        print("invalid algebra: %s" % e, file=sys.stderr)
        return EXIT_INPUT
    length = max(args.max_length, args.max_degree)
    t0 = time.perf_counter()
    tower = build_tower(alg, length, check_length=min(args.check_length, length))
    log.info("tower to length %d in %.1fs", length, time.perf_counter() - t0)
    T = VertexTruncation(tower, args.max_length, args.max_degree)
    state = StateDir(Path(args.out))
    state.root.mkdir(parents=True, exist_ok=True)
    raw = Path(args.algebra).read_bytes()
    state.write("tower/algebra.json", alg.to_document())
    state.write("tower/tower.json", tower.to_json())
    state.write("truncation/config.json", {
        "max_length": args.max_length,
        "max_degree": args.max_degree,
        "tower_length": length,
        "input_sha256": _sha256(raw),
    })
    state.write("truncation/dims.json", T.dimension_table())
    print("built tower to length %d; B_0 dims %s" % (length, tower.dimension_report()["b0"]))
    return EXIT_OK


def _truncation(tower: CoalgebraTower, config: dict) -> VertexTruncation:
    return VertexTruncation(tower, config["max_length"], config["max_degree"])


def cmd_verify(args) -> int:
    state, tower, config = load_state(Path(args.state))
    T = _truncation(tower, config)
    names = ["all"] if args.suite == "all" else args.suite.split(",")
    ranges = Ranges(modes=tuple(range(args.min_mode, args.max_mode + 1)))
    reports = run_suites(T, names, ranges)
    doc = {"suites": [r.to_json() for r in reports]}
    state.write("reports/verify.json", doc)
    ok = True
    for r in reports:
        print(r.summary())
        ok &= r.ok
    return EXIT_OK if ok else EXIT_CHECKS


def cmd_quotient(args) -> int:
    state, tower, config = load_state(Path(args.state))
    top = args.max_degree
    if top > tower.length:
        print("degree %d needs a tower of length %d; rebuild with a larger --max-degree" % (top, top), file=sys.stderr)
        return EXIT_INPUT
    T = VertexTruncation(tower, tower.length, top)
    try:
        if args.character == "aug":
            chi = augmentation_character(tower)
        else:
            chi = load_character(tower, json.loads(Path(args.character).read_text()))
    except (CharacterError, OSError, json.JSONDecodeError) as e:
        print("invalid character: %s" % e, file=sys.stderr)
        return EXIT_INPUT
    rows = []
    for d in range(top + 1):
        p = quotient_piece(T, chi, d)
        rows.append({"degree": d, "spanned": p.spanned, "dim": p.dim, "radical": p.radical_dim,
                     "radical_basis": [[[list(map(list, p.words[i])), _fmt(c)] for i, c in sorted(v.items())]
                                       for v in p.radical]})
        print("d = %d: dim V_d = %d, radical %d, simple quotient %d" % (d, p.spanned, p.radical_dim, p.dim))
    state.write("reports/quotient.json", {"character": chi.to_json(), "table": rows})
    return EXIT_OK


def _fmt(c) -> str:
    return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)


def cmd_report(args) -> int:
    state, tower, config = load_state(Path(args.state))
    doc = {
        "version": __version__,
        "input_sha256": config["input_sha256"],
        "cutoffs": {"max_length": config["max_length"], "max_degree": config["max_degree"],
                    "tower_length": config["tower_length"]},
        "generators": tower.gens.labels,
        "central_charge": _fmt(tower.algebra.central_charge()) if tower.algebra.unit is not None else None,
        "tower": tower.dimension_report(),
        "truncation_dims": state.read("truncation/dims.json"),
    }
    for kind in KINDS:
        key = "reports/spaces_%s.json" % kind
        if state.has(key):
            name = {"admissible": "dim_R", "indecomposable": "dim_R0"}.get(kind, "dim_" + kind)
            doc[name] = state.read(key)
    if state.has("reports/quotient.json"):
        doc["quotient"] = state.read("reports/quotient.json")
    if state.has("reports/verify.json"):
        doc["checks"] = state.read("reports/verify.json")["suites"]
    text = _dump(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ozva", description="Exact OZ vertex algebras from Griess algebra data.")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--threads", type=int, default=int(os.environ.get("OZVA_THREADS", "1")),
                   help="accepted for compatibility; results never depend on it")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spaces", help="dimensions and bases of admissible function spaces")
    s.add_argument("--l", type=int, help="number of variables")
    s.add_argument("--max-l", type=int, default=5, help="table for l = 2..max-l when --l is absent")
    s.add_argument("--kind", default="admissible", choices=sorted(KINDS))
    s.add_argument("--basis", action="store_true", help="also print the basis")
    s.add_argument("--state", help="record the dimensions in this state directory")
    s.set_defaults(func=cmd_spaces)

    b = sub.add_parser("build", help="build the coalgebra tower and the truncation")
    b.add_argument("--algebra", required=True)
    b.add_argument("--max-length", type=int, required=True)
    b.add_argument("--max-degree", type=int, required=True)
    b.add_argument("--check-length", type=int, default=5, help="run tower self-checks up to this length")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run the verification suites")
    v.add_argument("--state", required=True)
    v.add_argument("--suite", default="all", help="all or a comma list of: %s, b0_polynomiality" % ", ".join(SUITES))
    v.add_argument("--min-mode", type=int, default=-4)
    v.add_argument("--max-mode", type=int, default=6)
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("quotient", help="graded dimensions of the simple quotient")
    q.add_argument("--state", required=True)
    q.add_argument("--character", default="aug", help="'aug' or a JSON file with family coefficients")
    q.add_argument("--max-degree", type=int, required=True)
    q.set_defaults(func=cmd_quotient)

    r = sub.add_parser("report", help="assemble the deterministic report")
    r.add_argument("--state", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if args.command == "build" and (args.max_length < 2 or args.max_degree < 2):
        parser.error("--max-length and --max-degree must be at least 2")
    if args.command == "spaces" and args.l is not None and args.l < 0:
        parser.error("--l must be non-negative")
    try:
        return args.func(args)
    except StateError as e:
        print("state integrity error: %s" % e, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
