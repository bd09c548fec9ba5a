"""Command-line interface: ``lpbounds {fig1,fig2,overlap,gen,check}``.

Exit codes: 0 success, 1 configuration or parse error, 2 validation failure,
3 a bound violation was detected in the generated data.
"""
import argparse
import json
import logging
import sys

import numpy as np

from . import __version__, opfile
from .errors import ConfigInvalid, ParseError, UnknownKernel, ValidationError
from .experiments import ExperimentConfig, run_fig1, run_fig2, write_fig1, write_fig2
from .measure import domain_spec, improved_bound, validate_povm
from .metrics import BUILTIN_NAMES
from .randgen import (
    RngStream,
    random_mixed_states,
    random_povm_elements,
    random_pure_states,
    random_pvm_elements,
)

log = logging.getLogger("lpbounds")

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_VIOLATION = 0, 1, 2, 3

FULL_SCALE = {"fig1": {"pairs": 10_000, "states": 25}, "fig2": {"states": 50_000}}
DESK_SCALE = {"fig1": {"pairs": 1000, "states": 25}, "fig2": {"states": 10_000}}


def _kernel_list(values):
    return tuple(values) if values else BUILTIN_NAMES


def _add_experiment_args(p, fig):
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--na", type=int, default=4 if fig == "fig2" else 3)
    p.add_argument("--nb", type=int, default=5 if fig == "fig2" else 3)
    if fig == "fig1":
        p.add_argument("--pairs", type=int, default=None)
    p.add_argument("--states", type=int, default=None)
    p.add_argument("--kernel", action="append", default=None,
                   help="wootters|bures|root-infidelity (repeatable; default all)")
    p.add_argument("--mode", choices=("pvm", "povm"), default="pvm" if fig == "fig1" else "povm")
    p.add_argument("--states-kind", choices=("pure", "mixed", "both"),
                   default="both" if fig == "fig1" else "mixed")
    p.add_argument("--mixed-method", choices=("spectral", "wishart"), default="spectral")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--full-scale", action="store_true",
                   help="10^4 pairs (fig1) or 5x10^4 states (fig2) instead of the desk-scale defaults")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    ap = argparse.ArgumentParser(prog="lpbounds", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    _add_experiment_args(sub.add_parser("fig1", help="uncertainty sum vs. overlap scatter"), "fig1")
    _add_experiment_args(sub.add_parser("fig2", help="(P_A, P_B) cloud and allowed domain"), "fig2")

    p = sub.add_parser("overlap", help="overlaps, bounds and domain for two POVM files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--kernel", action="append", default=None)

    p = sub.add_parser("gen", help="write a random POVM, PVM or state file")
    p.add_argument("kind", choices=("povm", "pvm", "state-pure", "state-mixed"))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--outcomes", "--na", dest="outcomes", type=int, default=None)
    p.add_argument("--mixed-method", choices=("spectral", "wishart"), default="spectral")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("check", help="validate an operator file")
    p.add_argument("file")
    return ap


def _experiment_config(args, fig):
    scale = (FULL_SCALE if args.full_scale else DESK_SCALE)[fig]
    states = args.states if args.states is not None else scale["states"]
    pairs = 1
    if fig == "fig1":
        pairs = args.pairs if args.pairs is not None else scale["pairs"]
    return ExperimentConfig(
        dim=args.dim,
        n_a=args.na,
        n_b=args.nb,
        n_povm_pairs=pairs,
        n_states_per_pair=states,
        kernel_names=_kernel_list(args.kernel),
        observable_mode=args.mode,
        state_mode=args.states_kind,
        mixed_method=args.mixed_method,
        seed=args.seed,
        output_path=args.out,
        output_format=args.format,
    )


def cmd_fig1(args):
    cfg = _experiment_config(args, "fig1")
    rows, manifest = run_fig1(cfg, workers=args.workers)
    for path in write_fig1(cfg, rows, manifest):
        log.info("wrote %s", path)
    for name, s in manifest.kernels.items():
        print(f"{name}: records={s['records']} min_slack={s['min_slack']:.3e} violations={s['violations']}")
    return EXIT_VIOLATION if manifest.violations else EXIT_OK


def cmd_fig2(args):
    cfg = _experiment_config(args, "fig2")
    result, manifest = run_fig2(cfg, workers=args.workers)
    for path in write_fig2(cfg, result, manifest):
        log.info("wrote %s", path)
    spec = result["spec"]
    print(f"c_a={spec.c_a:.6f} c_b={spec.c_b:.6f} c_ab={spec.c_ab:.6f} "
          f"full_rectangle={spec.full_rectangle} points={len(result['rows'])} "
          f"outside={manifest.violations}")
    return EXIT_VIOLATION if manifest.violations else EXIT_OK


def overlap_report(a, b, kernels):
    """JSON-ready dict of overlaps, per-kernel bounds and the domain classification."""
    reports = [improved_bound(k, a, b) for k in kernels]
    first = reports[0].as_dict()
    return {
        "dim": a.dim,
        "n_a": len(a),
        "n_b": len(b),
        "c_a": first["c_a"],
        "c_b": first["c_b"],
        "c_ab": first["c_ab"],
        "argmax_pair": first["argmax_pair"],
        "overlap_bounds": {
            "lower": first["overlap_lower"],
            "upper": first["overlap_upper"],
            "ok": first["overlap_bounds_ok"],
        },
        "bounds": {
            r.kernel_name: {
                "joint": r.bound_joint,
                "intrinsic_sum": r.bound_intrinsic_sum,
                "improved": r.bound_improved,
            }
            for r in reports
        },
        "domain": domain_spec(a, b).as_dict(),
    }


def cmd_overlap(args):
    a = opfile.load_povm(args.file_a)
    b = opfile.load_povm(args.file_b)
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    print(json.dumps(overlap_report(a, b, _kernel_list(args.kernel)), indent=1))
    return EXIT_OK


def cmd_gen(args):
    rng = RngStream(args.seed, 0)
    if args.dim < 1:
        raise ConfigInvalid("dim must be >= 1")
    if args.kind == "povm":
        m = args.outcomes if args.outcomes is not None else args.dim
        if m < 2:
            raise ConfigInvalid("a POVM needs at least 2 outcomes")
        ops, kind = random_povm_elements(args.dim, m, rng), "povm"
    elif args.kind == "pvm":
        ops, kind = random_pvm_elements(args.dim, rng), "pvm"
    elif args.kind == "state-pure":
        psi = random_pure_states(args.dim, 1, rng)[0]
        ops, kind = np.outer(psi, np.conj(psi))[None], "state"
    else:
        ops, kind = random_mixed_states(args.dim, 1, rng, args.mixed_method), "state"
    opfile.write(args.out, kind, ops)
    log.info("wrote %s", args.out)
    return EXIT_OK


def cmd_check(args):
    of = opfile.read(args.file)
    if of.kind == "state":
        rho = opfile.load_state(args.file)
        tr = float(np.trace(rho.matrix).real)
        print(json.dumps({"kind": "state", "dim": of.dim, "trace": tr, "passed": True}))
        return EXIT_OK
    rep = validate_povm(of.operators)
    out = {"kind": of.kind, "dim": of.dim, "count": int(of.operators.shape[0])}
    out.update(rep.as_dict())
    print(json.dumps(out, indent=1))
    return EXIT_OK if rep.passed else EXIT_VALIDATION


COMMANDS = {
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "overlap": cmd_overlap,
    "gen": cmd_gen,
    "check": cmd_check,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigInvalid, ParseError, UnknownKernel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
