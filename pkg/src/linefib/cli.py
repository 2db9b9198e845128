"""Command-line front end.

Every subcommand writes one pretty-printed JSON report (stdout or ``--out``)
that embeds the tool version and the fully resolved configuration, so a
re-run with the same arguments reproduces the file byte for byte.

Exit codes: 0 when a verdict/report was computed (whatever it says),
1 for invalid input, 2 for numerical failures (degenerate winding, kernel
ambiguity, rank changes along a flow, failed standardization).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, _accel
from .expr import EvaluationError, ParseError, VectorFieldSpec, evaluate
from .fibration import Box, Tolerances, fibration_audit, grid_survey, parallel_pairs
from .gallery import example_gallery, get_example
from .lemmas import (
    KernelAmbiguityError,
    RankError,
    WindingError,
    constancy_along_flow,
    flow_kernel_field,
    projected_straightness,
    winding_number,
)
from .standardizer import ClosedFormTheta, StandardizationError, classify_field

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
MAX_LISTED_PAIRS = 1000


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _floats(text: str, count: tuple[int, ...], what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from exc
    if len(vals) not in count:
        raise InputError(f"{what}: expected {' or '.join(map(str, count))} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"{what}: values must be finite")
    return vals


def parse_box(text: str) -> Box:
    vals = _floats(text, (2, 6), "--box")
    try:
        if len(vals) == 2:
            return Box.cube(*vals)
        return Box(tuple(vals[0::2]), tuple(vals[1::2]))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--field", help='three comma-separated expressions, e.g. "cos(z),-sin(z),0"')
    src.add_argument("--example", help="name of a built-in example (see the examples subcommand)")
    p.add_argument("--normalize", action="store_true", help="divide the field by its norm")
    p.add_argument("--box", default="-1,1", help="lo,hi (cube) or x0,x1,y0,y1,z0,z1")
    p.add_argument("--grid", type=int, default=5, help="grid points per axis")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="write the report here instead of stdout")
    defaults = Tolerances()
    for name in ("unit", "straightness", "intersection", "angle", "rank", "contact"):
        p.add_argument(f"--tol-{name}", type=float, default=getattr(defaults, name))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linefib", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"linefib {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("audit", "fibration audit on a grid"),
        ("contact", "statistics of <V, curl V> on the grid"),
        ("rank", "rank profile of dV on the grid"),
        ("skew", "scan for distinct parallel lines"),
        ("standardize", "full classification, with the normal form in the rank-1 case"),
    ):
        p = sub.add_parser(name, help=help_text)
        _common(p)
        if name == "standardize":
            p.add_argument("--theta", help="closed-form angle profile t(z), used for the pullback check")
            p.add_argument("--theta-samples", type=int, default=201)
            p.add_argument("--flow-step", type=float, default=1e-2)
    p = sub.add_parser("winding", help="winding number of the projected field around a point")
    _common(p)
    p.add_argument("--at", required=True, help="x,y,z")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=64)
    p = sub.add_parser("flow", help="flow of the kernel line field from a point")
    _common(p)
    p.add_argument("--at", required=True, help="x,y,z")
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--step", type=float, default=1e-3)
    p = sub.add_parser("examples", help="list the built-in example fields")
    p.add_argument("--out")
    return parser


def _resolve_field(args) -> tuple[VectorFieldSpec, dict, str | None]:
    if args.example:
        try:
            ex = get_example(args.example)
        except KeyError as exc:
            raise InputError(exc.args[0]) from exc
        spec = ex.spec()
        return spec, {"example": ex.name, "components": list(ex.components), "normalize": ex.normalize}, ex.theta
    if not args.field:
        raise InputError("one of --field or --example is required")
    spec = VectorFieldSpec.parse(args.field, normalize=args.normalize)
    return spec, {"example": None, "components": spec.texts(), "normalize": args.normalize}, None


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _contact_block(survey, tol: Tolerances) -> dict:
    d = survey.contact_defects[survey.good]
    zero = bool(d.size == 0 or np.any(np.abs(d) <= tol.contact) or (d.min() < 0.0 < d.max()))
    return {
        "defect_min": float(d.min()) if d.size else None,
        "defect_max": float(d.max()) if d.size else None,
        "zero_set_detected": zero,
        "n_points": int(d.size),
    }


def _rank_block(survey) -> dict:
    r = survey.ranks[survey.good]
    hist = {str(k): int(np.count_nonzero(r == k)) for k in range(4)}
    present = [k for k, c in hist.items() if c]
    return {"rank_histogram": hist, "rank_profile": f"constant {present[0]}" if len(present) == 1 else "mixed"}


def _winding_dict(at, eps, res) -> dict:
    return {"at": list(at), "epsilon": eps, **asdict(res)}


def _run(args, config: dict, spec: VectorFieldSpec, theta_text: str | None) -> tuple[dict, int]:
    box = parse_box(args.box)
    tol = Tolerances(
        unit=args.tol_unit,
        straightness=args.tol_straightness,
        intersection=args.tol_intersection,
        angle=args.tol_angle,
        rank=args.tol_rank,
        contact=args.tol_contact,
    )
    if args.grid < 2:
        raise InputError("--grid must be at least 2")
    config.update(box={"lo": list(box.lo), "hi": list(box.hi)}, grid=args.grid, seed=args.seed, tolerances=asdict(tol))
    cmd = args.command
    if cmd == "audit":
        return {"audit": fibration_audit(spec, box, args.grid, tol).to_dict()}, EXIT_OK
    if cmd == "contact":
        sv = grid_survey(spec, box, args.grid, tol.rank)
        return {"contact": _contact_block(sv, tol), "evaluation_errors": sv.errors}, EXIT_OK
    if cmd == "rank":
        sv = grid_survey(spec, box, args.grid, tol.rank)
        return {"rank": _rank_block(sv), "evaluation_errors": sv.errors}, EXIT_OK
    if cmd == "skew":
        pairs = parallel_pairs(spec, box, args.grid, tol.angle)
        return {
            "skew": {
                "angle_tol": tol.angle,
                "parallel_pairs_count": len(pairs),
                "is_skew_on_box": not pairs,
                "pairs": [{"i": i, "j": j, "angle": a} for (i, j), a in pairs[:MAX_LISTED_PAIRS]],
                "truncated": len(pairs) > MAX_LISTED_PAIRS,
            }
        }, EXIT_OK
    if cmd == "winding":
        at = _floats(args.at, (3,), "--at")
        if args.eps <= 0 or args.samples < 16:
            raise InputError("--eps must be positive and --samples at least 16")
        config.update(at=at, eps=args.eps, samples=args.samples)
        res = winding_number(spec, at, args.eps, args.samples)
        return {"lemma_checks": {"winding": [_winding_dict(at, args.eps, res)], "flow": []}}, (
            EXIT_NUMERIC if res.degenerate else EXIT_OK
        )
    if cmd == "flow":
        at = _floats(args.at, (3,), "--at")
        if args.t_max <= 0 or args.step <= 0:
            raise InputError("--t-max and --step must be positive")
        config.update(at=at, t_max=args.t_max, step=args.step)
        curve = flow_kernel_field(spec, at, args.t_max, args.step, tol.rank)
        V0 = evaluate(spec, at)
        rec = {
            "start": at,
            "t_max": args.t_max,
            "step": curve.step,
            "n_points": int(len(curve.points)),
            "endpoints": [curve.points[0].tolist(), curve.points[-1].tolist()],
            "constancy": constancy_along_flow(spec, curve),
            "projected_straightness": projected_straightness(curve, V0),
        }
        return {"lemma_checks": {"winding": [], "flow": [rec]}}, EXIT_OK
    if cmd == "standardize":
        if args.theta:
            theta_text = args.theta
        theta = ClosedFormTheta.parse(theta_text) if theta_text else None
        config.update(theta=theta.text if theta else None, theta_samples=args.theta_samples, flow_step=args.flow_step)
        res = classify_field(
            spec, box, args.grid, tol, seed=args.seed, theta=theta, theta_samples=args.theta_samples, flow_step=args.flow_step
        )
        report = {
            "audit": res.audit.to_dict(),
            "contact": {
                "defect_min": res.audit.contact_defect_min,
                "defect_max": res.audit.contact_defect_max,
                "zero_set_detected": res.audit.contact_zero_set_detected,
            },
            "lemma_checks": {
                "winding": [_winding_dict(box.center.tolist(), 0.05 * float(box.half_widths.min()), res.winding)]
                if res.winding
                else [],
                "flow": [res.flow] if res.flow else [],
            },
        }
        std = {"verdict": res.verdict, "citation": res.citation, "diagnostics": res.diagnostics}
        if res.profile is not None:
            prof = res.profile
            std.update(
                frame={"origin": res.frame.origin, "e1": res.frame.e1, "e2": res.frame.e2, "e3": res.frame.e3},
                theta_z=prof.z,
                theta_values=prof.theta,
                theta_prime_min=float(prof.theta_prime.min()),
                theta_prime_max=float(prof.theta_prime.max()),
                pullback_defect=res.pullback_defect,
                closed_form_pullback_defect=res.closed_form_pullback_defect,
                normal_form_defect=res.normal_form_defect,
            )
        report["standardization"] = std
        exit_code = EXIT_OK
        if res.winding is not None and res.winding.degenerate:
            exit_code = EXIT_NUMERIC
        return report, exit_code
    raise InputError(f"unknown command {cmd!r}")  # pragma: no cover


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_clean(report), indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_VALUE_OPTIONS = ("--box", "--at", "--field", "--theta")


def _join_values(argv: list[str]) -> list[str]:
    """Glue option values that start with '-' (``--box -1,1``) to their option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"linefib: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    header = {"tool": {"name": "linefib", "version": __version__, "backend": _accel.backend_name()}, "command": args.command}
    if args.command == "examples":
        header["config"] = {}
        header["examples"] = [
            {"name": ex.name, "components": list(ex.components), "normalize": ex.normalize, "description": ex.description}
            for ex in example_gallery().values()
        ]
        _emit(header, args.out)
        return EXIT_OK
    config: dict = {}
    header["config"] = config
    try:
        spec, field_cfg, theta_text = _resolve_field(args)
        config["field"] = field_cfg
        body, code = _run(args, config, spec, theta_text)
    except (InputError, ParseError, EvaluationError) as exc:
        print(f"linefib: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RankError, KernelAmbiguityError, WindingError, StandardizationError) as exc:
        header["error"] = {"type": type(exc).__name__, "message": str(exc)}
        _emit(header, args.out)
        print(f"linefib: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    header.update(body)
    _emit(header, args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
