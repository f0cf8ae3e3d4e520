"""Command-line front end.

Subcommands: ``dss find``, ``dss check``, ``decompose``, ``entanglement``,
``filter-compare``, ``simulate`` and ``rankbound``.  Text reports are
stable-ordered and diff-friendly with numbers at 12 significant digits;
``--json`` additionally writes the structured report.  Exit codes: 0 on
success, 2 when ``dss find`` finds no certificate (absence is a result,
not an error), 1 on input or validation problems.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import fileio
from .entanglement import (
    entanglement_of_formation,
    filter_comparison,
    filter_comparison_curve,
    dimension_signature,
    schmidt,
)
from .errors import Error
from .linalg import Tolerance, numerical_rank
from .localops import decompose
from .protocols import ghz_from_two_copies, run, werner_concurrence_table, werner_two_copy
from .states import (
    DensityMatrix,
    SystemShape,
    bell_state,
    filter_example,
    ghz_state,
    tensor_power,
    three_qubit_example,
    w_state,
    w_state_variant,
    werner,
)
from .subspaces import (
    DssCertificate,
    Refusal,
    candidate_count,
    check_certificate,
    check_rank_bound,
    find_dss,
    rank_bound,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CERTIFICATE = 2

TOLERANCE_PROFILES = {
    "default": Tolerance(),
    "strict": Tolerance(1e-12, 1e-12, 1e-12, 1e-12),
    "loose": Tolerance(1e-6, 1e-6, 1e-6, 1e-6),
}

TOLERANCE_ENV_VAR = "DSSKIT_TOLERANCE_PROFILE"

#: Preset states addressable from --state, with the flag each one consumes.
PRESETS = {
    "example3q": ("p", lambda args: three_qubit_example(args.p)),
    "werner": ("F", lambda args: werner(args.F)),
    "filter": ("lam", lambda args: filter_example(args.lam)),
    "ghz": (None, lambda args: ghz_state().to_density()),
    "w": (None, lambda args: w_state().to_density()),
    "w-variant": (None, lambda args: w_state_variant().to_density()),
    "bell": (None, lambda args: bell_state("phi+").to_density()),
}


class CliUsageError(Error):
    """Bad flags or arguments; maps to exit code 1, never 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse from exiting with code 2
        raise CliUsageError(f"{message}\n{self.format_usage()}".rstrip())


@dataclass
class Report:
    """One command's structured result; round-trips through its dict form."""

    command: str
    inputs: dict
    results: dict
    warnings: list = field(default_factory=list)
    timing_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "warnings": list(self.warnings),
            "timing_ms": self.timing_ms,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Report":
        return cls(
            command=doc["command"],
            inputs=dict(doc["inputs"]),
            results=dict(doc["results"]),
            warnings=list(doc["warnings"]),
            timing_ms=float(doc["timing_ms"]),
        )

    def __eq__(self, other):
        return isinstance(other, Report) and self.to_dict() == other.to_dict()


def _fmt_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return "none"
    return str(value)


def _is_scalar(value) -> bool:
    return not isinstance(value, (Mapping, list, tuple))


def _render_lines(value, indent: int) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(value, Mapping):
        for key, val in value.items():
            if _is_scalar(val):
                lines.append(f"{pad}{key}: {_fmt_scalar(val)}")
            elif isinstance(val, (list, tuple)) and all(_is_scalar(v) for v in val):
                inline = ", ".join(_fmt_scalar(v) for v in val)
                lines.append(f"{pad}{key}: [{inline}]")
            elif not val:
                lines.append(f"{pad}{key}: []" if isinstance(val, (list, tuple)) else f"{pad}{key}: {{}}")
            else:
                lines.append(f"{pad}{key}:")
                lines.extend(_render_lines(val, indent + 1))
    elif isinstance(value, (list, tuple)):
        for item in value:
            if _is_scalar(item):
                lines.append(f"{pad}- {_fmt_scalar(item)}")
            elif isinstance(item, (list, tuple)) and all(_is_scalar(v) for v in item):
                inline = ", ".join(_fmt_scalar(v) for v in item)
                lines.append(f"{pad}- [{inline}]")
            else:
                lines.append(f"{pad}-")
                lines.extend(_render_lines(item, indent + 1))
    else:
        lines.append(f"{pad}{_fmt_scalar(value)}")
    return lines


def render_report(report: Report, fmt: str = "text") -> str:
    if fmt == "json":
        import json

        return json.dumps(report.to_dict(), indent=2)
    if fmt != "text":
        raise CliUsageError(f"unknown output format {fmt!r}")
    lines = [f"command: {report.command}"]
    lines.append("inputs:")
    lines.extend(_render_lines(report.inputs, 1))
    lines.append("results:")
    lines.extend(_render_lines(report.results, 1))
    if report.warnings:
        lines.append("warnings:")
        lines.extend(_render_lines(report.warnings, 1))
    else:
        lines.append("warnings: []")
    lines.append(f"elapsed ms: {report.timing_ms:.12g}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise CliUsageError(f"expected a comma-separated integer list, got {text!r}") from exc


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="also write the structured report (use '-' for stdout)")
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized feature (default 0)")
    for name in ("rank-rtol", "herm-atol", "psd-atol", "purity-atol"):
        common.add_argument(f"--{name}", type=float, default=None, help=f"override tolerance {name}")
    return common


def _state_options() -> argparse.ArgumentParser:
    opts = argparse.ArgumentParser(add_help=False)
    opts.add_argument("--state", required=True, help="state file path or preset name "
                      f"({', '.join(sorted(PRESETS))})")
    opts.add_argument("--p", type=float, help="mixing weight for the example3q preset")
    opts.add_argument("--F", type=float, help="fidelity parameter for the werner preset")
    opts.add_argument("--lambda", dest="lam", type=float, help="mixing weight for the filter preset")
    opts.add_argument("--copies", type=int, default=1, help="tensor-power copies (default 1)")
    return opts


def build_parser() -> _Parser:
    parser = _Parser(prog="dsskit", description=__doc__)
    common = _common_options()
    state_opts = _state_options()
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    dss = sub.add_parser("dss", help="distillable-subspace search and certificate checks")
    dss_sub = dss.add_subparsers(dest="dss_command", parser_class=_Parser, required=True)

    find = dss_sub.add_parser("find", parents=[common, state_opts],
                              help="search basis subsets for distillable subspaces")
    find.add_argument("--bases", metavar="PATH", help="per-party rotated bases file")
    find.add_argument("--require-entangled", action=argparse.BooleanOptionalAction, default=True,
                      help="keep only pure entangled projections (default on)")
    find.add_argument("--min-signature", type=_int_list, default=None,
                      help="componentwise lower bound on the dimension signature, e.g. 2,2,2")
    find.add_argument("--workers", type=int, default=1, help="candidate evaluation threads")

    check = dss_sub.add_parser("check", parents=[common, state_opts],
                               help="re-verify a claimed distillable subspace")
    check.add_argument("--subspace", required=True, metavar="PATH", help="subspace file to verify")

    dec = sub.add_parser("decompose", parents=[common],
                         help="factor a product operator into projector, filter and unitary parts")
    dec.add_argument("--operator", required=True, metavar="PATH", help="operator file")

    sub.add_parser("entanglement", parents=[common, state_opts],
                   help="signature / Schmidt / concurrence / entanglement of formation")

    fc = sub.add_parser("filter-compare", parents=[common],
                        help="entanglement of formation before and after the upgrade filter")
    fc.add_argument("--lambda", dest="lam", type=float, required=True, help="mixing weight")
    fc.add_argument("--grid", metavar="A:B:STEP", help="also evaluate the comparison on a lambda grid")

    sim = sub.add_parser("simulate", parents=[common],
                         help="run a protocol file or a built-in worked example")
    sim.add_argument("builtin", nargs="?", choices=("ghz-example", "werner-example"),
                     help="built-in protocol to run")
    sim.add_argument("--p", type=float, help="mixing weight for ghz-example")
    sim.add_argument("--F", type=float, help="fidelity for werner-example")
    sim.add_argument("--protocol", metavar="PATH", help="protocol file (with --state)")
    sim.add_argument("--state", help="state file or preset for --protocol runs")
    sim.add_argument("--lambda", dest="lam", type=float, help="mixing weight for the filter preset")
    sim.add_argument("--copies", type=int, default=1)

    rb = sub.add_parser("rankbound", parents=[common],
                        help="rank ceiling for producing a pure state of a given signature")
    rb.add_argument("--dims", type=_int_list, help="per-party dims, e.g. 2,2,2")
    rb.add_argument("--state", help="state file or preset (dims taken from it; measured rank reported)")
    rb.add_argument("--p", type=float)
    rb.add_argument("--F", type=float)
    rb.add_argument("--lambda", dest="lam", type=float)
    rb.add_argument("--copies", type=int, default=1)
    rb.add_argument("--signature", type=_int_list, required=True, help="target signature, e.g. 2,2,2")

    return parser


def _resolve_tolerance(args) -> tuple[Tolerance, list[str]]:
    warnings: list[str] = []
    profile_name = os.environ.get(TOLERANCE_ENV_VAR, "default")
    if profile_name not in TOLERANCE_PROFILES:
        raise CliUsageError(
            f"{TOLERANCE_ENV_VAR}={profile_name!r} is not one of {sorted(TOLERANCE_PROFILES)}"
        )
    base = TOLERANCE_PROFILES[profile_name]
    fields = {}
    for flag, attr in (
        ("rank_rtol", "rank_rtol"),
        ("herm_atol", "herm_atol"),
        ("psd_atol", "psd_atol"),
        ("purity_atol", "purity_atol"),
    ):
        value = getattr(args, flag, None)
        if value is None:
            fields[attr] = getattr(base, attr)
        else:
            if not 0.0 <= value <= 1e-3:
                raise CliUsageError(f"--{flag.replace('_', '-')} must lie in [0, 1e-3], got {value}")
            fields[attr] = value
    if profile_name != "default":
        warnings.append(f"tolerance profile {profile_name!r} from {TOLERANCE_ENV_VAR}")
    return Tolerance(**fields), warnings


def _file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()[:16]


def _resolve_state(args) -> tuple[DensityMatrix, dict]:
    name = args.state
    if name in PRESETS:
        param, builder = PRESETS[name]
        inputs: dict[str, Any] = {"preset": name}
        if param is not None:
            if getattr(args, param) is None:
                flag = {"p": "--p", "F": "--F", "lam": "--lambda"}[param]
                raise CliUsageError(f"preset {name!r} requires {flag}")
            inputs[param if param != "lam" else "lambda"] = getattr(args, param)
        return builder(args), inputs
    if os.path.exists(name):
        rho = fileio.read_state(name)
        return rho, {"path": name, "sha256": _file_digest(name)}
    raise CliUsageError(f"--state {name!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file")


def _state_with_copies(args) -> tuple[DensityMatrix, DensityMatrix, dict]:
    """Resolve the single-copy state and its tensor power per --copies."""
    single, inputs = _resolve_state(args)
    copies = getattr(args, "copies", 1)
    if copies < 1:
        raise CliUsageError(f"--copies must be >= 1, got {copies}")
    inputs["copies"] = copies
    return single, tensor_power(single, copies), inputs


def _subspace_doc(cert_subspace) -> dict:
    if cert_subspace.basis_indices is not None:
        return {
            "per_party_indices": {
                label: list(idx)
                for label, idx in zip(cert_subspace.labels, cert_subspace.basis_indices)
            }
        }
    return {
        "per_party_dims": {label: v.shape[1] for label, v in cert_subspace.parties}
    }


def _certificate_doc(cert: DssCertificate) -> dict:
    return {
        "subspace": _subspace_doc(cert.subspace),
        "weight": cert.outcome.weight,
        "classification": cert.outcome.classification,
        "signature": list(cert.outcome.signature),
    }


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_dss_find(args, tol, warnings) -> tuple[Report, int]:
    single, sigma, inputs = _state_with_copies(args)
    bases = None
    if args.bases:
        bases = fileio.load_bases(fileio.read_json(args.bases), sigma.shape)
        inputs["bases"] = {"path": args.bases, "sha256": _file_digest(args.bases)}
    count = candidate_count(sigma.shape)
    certs = find_dss(
        sigma,
        bases,
        require_entangled=args.require_entangled,
        min_signature=args.min_signature,
        tol=tol,
        workers=max(1, args.workers),
    )
    results: dict[str, Any] = {
        "search_space_dims": list(sigma.shape.dims),
        "candidates": count,
        "certificates_found": len(certs),
    }
    docs = []
    for cert in certs:
        doc = _certificate_doc(cert)
        bound = check_rank_bound(single, inputs["copies"], cert, tol)
        doc["rank_bound_check"] = {
            "rank": bound.rank,
            "bound": bound.bound,
            "satisfied": bound.satisfied,
        }
        docs.append(doc)
    if docs:
        results["certificates"] = docs
        code = EXIT_OK
    else:
        results["message"] = "no DSS found over supplied bases"
        code = EXIT_NO_CERTIFICATE
    return Report("dss find", inputs, results, warnings), code


def _cmd_dss_check(args, tol, warnings) -> tuple[Report, int]:
    single, sigma, inputs = _state_with_copies(args)
    subspace = fileio.read_subspace(args.subspace)
    inputs["subspace"] = {"path": args.subspace, "sha256": _file_digest(args.subspace)}
    verdict = check_certificate(sigma, subspace, tol)
    if isinstance(verdict, Refusal):
        results = {
            "accepted": False,
            "refusal": verdict.reason,
            "weight": verdict.outcome.weight,
            "classification": verdict.outcome.classification,
        }
    else:
        results = {"accepted": True, **_certificate_doc(verdict)}
        bound = check_rank_bound(single, inputs["copies"], verdict, tol)
        results["rank_bound_check"] = {
            "rank": bound.rank,
            "bound": bound.bound,
            "satisfied": bound.satisfied,
        }
    return Report("dss check", inputs, results, warnings), EXIT_OK


def _cmd_decompose(args, tol, warnings) -> tuple[Report, int]:
    op = fileio.read_operator(args.operator)
    inputs = {"operator": {"path": args.operator, "sha256": _file_digest(args.operator)}}
    factors = []
    for factor in op.factors:
        parts = decompose(factor, tol)
        if factor.scale != 1.0:
            warnings.append(
                f"factor for party {factor.party!r} rescaled by 1/{factor.scale:.12g} "
                "to satisfy the unit spectral-norm bound"
            )
        factors.append(
            {
                "party": factor.party,
                "retained_dim": parts.retained_dim,
                "weights": [float(w) for w in parts.weights],
                "retained_basis": fileio.matrix_to_doc(parts.retained_basis),
                "projector": fileio.matrix_to_doc(parts.lpo),
                "filter": fileio.matrix_to_doc(parts.lfo),
                "unitary": fileio.matrix_to_doc(parts.luo),
            }
        )
    return Report("decompose", inputs, {"factors": factors}, warnings), EXIT_OK


def _cmd_entanglement(args, tol, warnings) -> tuple[Report, int]:
    _, rho, inputs = _state_with_copies(args)
    results: dict[str, Any] = {"per_party_dims": list(rho.shape.dims)}
    evals = rho.eigenvalues()
    results["top_eigenvalue"] = float(evals[0])
    results["pure"] = bool(evals[0] >= 1.0 - tol.purity_atol)
    if results["pure"]:
        psi = rho.top_eigenstate(tol)
        results["signature"] = list(dimension_signature(psi, tol))
        if len(rho.shape.parties) == 2:
            results["schmidt_coefficients"] = [float(c) for c in schmidt(psi)]
    if rho.shape.dims == (2, 2):
        report = entanglement_of_formation(rho, tol)
        results["concurrence"] = report.concurrence
        results["entanglement_of_formation"] = report.eof
    return Report("entanglement", inputs, results, warnings), EXIT_OK


def _parse_grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise CliUsageError(f"--grid expects A:B:STEP, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise CliUsageError(f"--grid needs step > 0 and B >= A, got {text!r}")
    values = []
    x = start
    while x <= stop + 1e-12:
        values.append(round(x, 12))
        x += step
    return values


def _cmd_filter_compare(args, tol, warnings) -> tuple[Report, int]:
    inputs: dict[str, Any] = {"lambda": args.lam}
    comparison = filter_comparison(args.lam, tol)
    results: dict[str, Any] = {
        "eof_before": comparison.eof_before,
        "eof_after": comparison.eof_after,
        "concurrence_before": comparison.concurrence_before,
        "concurrence_after": comparison.concurrence_after,
        "lambda_prime": comparison.lambda_prime,
        "success_probability": comparison.success_probability,
        "improved": comparison.improved,
    }
    if args.grid:
        grid = _parse_grid(args.grid)
        inputs["grid"] = args.grid
        results["grid"] = [
            {"lambda": row.lam, "eof_before": row.eof_before, "eof_after": row.eof_after}
            for row in filter_comparison_curve(grid, tol)
        ]
    return Report("filter-compare", inputs, results, warnings), EXIT_OK


def _cmd_simulate(args, tol, warnings) -> tuple[Report, int]:
    if args.builtin == "ghz-example":
        if args.p is None:
            raise CliUsageError("simulate ghz-example requires --p")
        report = ghz_from_two_copies(args.p, tol)
        results = {
            "success_probability": report.success_probability,
            "all_branches_corrected": report.all_corrected,
            "branches": [
                {
                    "outcomes": list(b.outcomes),
                    "probability": b.probability,
                    "fidelity": b.fidelity,
                    "fidelity_uncorrected": b.fidelity_uncorrected,
                }
                for b in report.branches
            ],
        }
        return Report("simulate ghz-example", {"p": args.p}, results, warnings), EXIT_OK
    if args.builtin == "werner-example":
        if args.F is None:
            raise CliUsageError("simulate werner-example requires --F")
        report = werner_two_copy(args.F, tol)
        results = {
            "concurrence_before": report.concurrence_before,
            "combined_concurrence": report.combined_concurrence,
            "subspaces": [
                {
                    "name": s.name,
                    "per_party_indices": list(s.indices),
                    "weight": s.weight,
                    "bell_diagonal": s.bell_diagonal,
                    "max_bell_offdiag": s.max_bell_offdiag,
                    "concurrence_after": s.concurrence_after,
                }
                for s in report.subspaces
            ],
        }
        return Report("simulate werner-example", {"F": args.F}, results, warnings), EXIT_OK
    if not args.protocol or not args.state:
        raise CliUsageError("simulate needs a builtin name, or both --protocol and --state")
    _, rho, inputs = _state_with_copies(args)
    steps = fileio.read_protocol(args.protocol)
    inputs["protocol"] = {"path": args.protocol, "sha256": _file_digest(args.protocol)}
    outcome = run(steps, rho)
    results = {
        "steps": len(steps),
        "success_probability": outcome.success_probability,
        "dropped_weight": outcome.dropped_weight,
        "branches": [
            {
                "outcomes": list(b.outcomes),
                "probability": b.probability,
                "final_dims": list(b.state.shape.dims),
            }
            for b in outcome.branches
        ],
    }
    return Report("simulate", inputs, results, warnings), EXIT_OK


def _cmd_rankbound(args, tol, warnings) -> tuple[Report, int]:
    measured = None
    if args.state:
        single, sigma, inputs = _state_with_copies(args)
        shape = single.shape
        measured = numerical_rank(sigma.mat, tol)
    elif args.dims:
        shape = SystemShape.of(*((chr(ord("A") + i), d) for i, d in enumerate(args.dims)))
        inputs = {"dims": list(args.dims), "copies": args.copies}
    else:
        raise CliUsageError("rankbound needs --dims or --state")
    inputs["signature"] = list(args.signature)
    bound = rank_bound(shape, args.copies, args.signature)
    results: dict[str, Any] = {"bound": bound}
    if measured is not None:
        results["measured_rank"] = measured
        results["satisfied"] = measured <= bound
    return Report("rankbound", inputs, results, warnings), EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _dispatch(args, tol, warnings) -> tuple[Report, int]:
    if args.command == "dss":
        if args.dss_command == "find":
            return _cmd_dss_find(args, tol, warnings)
        return _cmd_dss_check(args, tol, warnings)
    handler = {
        "decompose": _cmd_decompose,
        "entanglement": _cmd_entanglement,
        "filter-compare": _cmd_filter_compare,
        "simulate": _cmd_simulate,
        "rankbound": _cmd_rankbound,
    }[args.command]
    return handler(args, tol, warnings)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        tol, warnings = _resolve_tolerance(args)
        report, code = _dispatch(args, tol, warnings)
    except CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report.inputs.setdefault("seed", args.seed)
    report.timing_ms = (time.perf_counter() - started) * 1000.0
    print(render_report(report, "text"))
    if args.json:
        payload = render_report(report, "json")
        if args.json == "-":
            print(payload)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
