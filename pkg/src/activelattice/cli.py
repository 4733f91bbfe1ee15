"""Command-line driver: every check reads JSON, writes a JSON report and signals by exit code.

Exit codes: 0 verified, 1 checked and false, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Callable

from . import __version__
from .active import counterexample_m2, dye_condition_check, morphism_from_json, reconstruct
from .boolean import (
    FiniteBooleanAlgebra,
    FiniteOml,
    colimit_F,
    func_algebra,
    load_structure,
    oml_commeas,
    pcba_to_oml,
    proj_of_F,
    stone_spectrum,
)
from .core import AlgebraShape, Element, SeededSampler, ToleranceConfig, block_det, is_unitary
from .errors import ActiveLatticeError, DomainError
from .lattice import commeasurable, commutator, join, meet, ortho
from .symmetry import factor_det_pm1, sym_member

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int
    samples: int
    tol: ToleranceConfig
    output: str | None

    def to_json(self) -> dict:
        return {"seed": self.seed, "samples": self.samples, "tol": self.tol.to_json()}


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get("AL_SEED")
        try:
            seed = int(env) if env not in (None, "") else 0
        except ValueError:
            raise UsageError(f"AL_SEED must be an integer, got {env!r}") from None
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must fit in 64 unsigned bits")
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    base = ToleranceConfig()
    try:
        tol = ToleranceConfig(
            eq_tol=base.eq_tol if args.tol_eq is None else args.tol_eq,
            rank_tol=base.rank_tol if args.tol_rank is None else args.tol_rank,
            verify_tol=base.verify_tol if args.tol_verify is None else args.tol_verify,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(seed, args.samples, tol, args.output)


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _read_element(path: str) -> Element:
    return Element.from_json(_read_json(path))


def _parse_shape(text: str) -> AlgebraShape:
    try:
        return AlgebraShape.parse(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad --algebra {text!r}: {exc}") from None


# -- commands ------------------------------------------------------------------
# each returns (exit code, result payload)

def cmd_lattice(args, cfg: RunConfig):
    a = _read_element(args.a)
    if args.op == "ortho":
        if args.b is not None:
            raise UsageError("ortho takes a single projection")
        return EXIT_OK, {"element": ortho(a, cfg.tol).to_json()}
    if args.b is None:
        raise UsageError(f"{args.op} needs two projections")
    b = _read_element(args.b)
    op = {"meet": meet, "join": join, "commutator": commutator}[args.op]
    return EXIT_OK, {"element": op(a, b, cfg.tol).to_json()}


def cmd_commeasurable(args, cfg: RunConfig):
    report = commeasurable(_read_element(args.a), _read_element(args.b), cfg.tol)
    return (EXIT_OK if report.verdict else EXIT_FALSE), report.to_json(cfg.tol)


def _det_payload(u: Element) -> list:
    return [[d.real, d.imag] for d in block_det(u)]


def cmd_factor(args, cfg: RunConfig):
    u = _read_element(args.u)
    if not is_unitary(u, cfg.tol):
        raise DomainError("input is not unitary")
    if not sym_member(u, cfg.tol):
        return EXIT_FALSE, {"message": "det(u)^2 != 1 in some block; not a product of symmetries",
                            "dets": _det_payload(u)}
    return EXIT_OK, factor_det_pm1(u, cfg.tol).to_json()


def cmd_sym_member(args, cfg: RunConfig):
    u = _read_element(args.u)
    member = sym_member(u, cfg.tol)
    return (EXIT_OK if member else EXIT_FALSE), {"member": member, "dets": _det_payload(u)}


def _morphism(args, cfg: RunConfig):
    return morphism_from_json(_read_json(args.morphism), _parse_shape(args.algebra), cfg.tol)


def cmd_dye(args, cfg: RunConfig):
    f = _morphism(args, cfg)
    residual = dye_condition_check(f, cfg.samples, SeededSampler(cfg.seed))
    ok = residual <= cfg.tol.verify_tol
    return (EXIT_OK if ok else EXIT_FALSE), {"morphism": f.name, "dye_residual": residual, "verdict": ok}


def cmd_reconstruct(args, cfg: RunConfig):
    f = _morphism(args, cfg)
    report = reconstruct(f, min(cfg.samples, 100), SeededSampler(cfg.seed))
    return (EXIT_OK if report.verdict else EXIT_FALSE), {"morphism": f.name, **report.to_json()}


def cmd_demo(args, cfg: RunConfig):
    _, _, report = counterexample_m2(cfg.samples, SeededSampler(cfg.seed), cfg.tol)
    return (EXIT_OK if report.passed else EXIT_FALSE), report.to_json()


def _as_pcba(structure):
    if isinstance(structure, FiniteBooleanAlgebra):
        structure = structure.as_oml()
    if isinstance(structure, FiniteOml):
        return structure, oml_commeas(structure)
    return None, structure


def cmd_boolean(args, cfg: RunConfig):
    structure = load_structure(_read_json(args.b))
    if args.op == "stone":
        if not isinstance(structure, FiniteBooleanAlgebra):
            raise UsageError("boolean stone expects {\"atoms\": n}")
        report = func_algebra(structure)
        payload = {"points": [c.atom for c in stone_spectrum(structure)], **report.to_json()}
        return (EXIT_OK if report.isomorphic else EXIT_FALSE), payload
    oml, pcba = _as_pcba(structure)
    if args.op == "colimit":
        F = colimit_F(pcba)
        blocks = pcba.maximal_blocks()
        payload = {
            "elements": len(pcba),
            "maximal_blocks": [[pcba.elements[k] for k in blk] for blk in blocks],
            "partitions_of_unity": len(F.partitions_of_unity()),
            "projections": len(F.projections()),
        }
        return EXIT_OK, payload
    equivalence = proj_of_F(pcba)
    try:
        recovered = pcba_to_oml(pcba)
        kalmbach = {"ok": oml is None or recovered == oml, "reason": None}
    except DomainError as exc:
        kalmbach = {"ok": False, "reason": str(exc)}
    ok = equivalence.isomorphic and kalmbach["ok"]
    return (EXIT_OK if ok else EXIT_FALSE), {"equivalence": equivalence.to_json(), "kalmbach": kalmbach, "verdict": ok}


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $AL_SEED or 0)")
    common.add_argument("--samples", type=int, default=500)
    common.add_argument("--tol-eq", type=float, default=None)
    common.add_argument("--tol-rank", type=float, default=None)
    common.add_argument("--tol-verify", type=float, default=None)
    common.add_argument("--output", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="activelattice", parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", parents=[common], help="meet/join/ortho/commutator of projections")
    p.add_argument("op", choices=["meet", "join", "ortho", "commutator"])
    p.add_argument("a")
    p.add_argument("b", nargs="?")
    p.set_defaults(run=cmd_lattice)

    p = sub.add_parser("commeasurable", parents=[common], help="five commeasurability criteria")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(run=cmd_commeasurable)

    p = sub.add_parser("factor-symmetries", parents=[common], help="write a unitary as a product of symmetries")
    p.add_argument("u")
    p.set_defaults(run=cmd_factor)

    p = sub.add_parser("sym-member", parents=[common], help="is det(u)^2 = 1 in every block")
    p.add_argument("u")
    p.set_defaults(run=cmd_sym_member)

    for name, run in (("dye-check", cmd_dye), ("reconstruct", cmd_reconstruct)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--morphism", required=True)
        p.add_argument("--algebra", required=True, help="block sizes, e.g. 2,3,1")
        p.set_defaults(run=run)

    p = sub.add_parser("demo", parents=[common], help="built-in demonstrations")
    p.add_argument("name", choices=["counterexample"])
    p.set_defaults(run=cmd_demo)

    p = sub.add_parser("boolean", parents=[common], help="finite Boolean / pcba checks")
    p.add_argument("op", choices=["stone", "colimit", "roundtrip"])
    p.add_argument("b")
    p.set_defaults(run=cmd_boolean)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    run: Callable = args.run
    try:
        cfg = _resolve_config(args)
        code, result = run(args, cfg)
        report = {
            "tool": "activelattice",
            "version": __version__,
            "command": args.command,
            "config": cfg.to_json(),
            "exit_code": code,
            "result": result,
        }
        _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", cfg.output)
        return code
    except (UsageError, ActiveLatticeError, ValueError) as exc:
        print(f"activelattice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"activelattice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
