"""Command-line interface.

Exit codes: 0 success (or certified), 1 valid input that fails
certification, 2 usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapacityError, DomainError, SingularDesignError
from .measures import DepthDesign, info_diagonal, log_det, realize_exact
from .model import ModelSpec, enumerate_orbit
from .optimality import conjecture_probe, d_optimal_design, kw_certify
from .simulate import SimulationConfig, monte_carlo
from .tables import variance_rows, weight_rows

NORMALIZATION = "per-observation: M = sum over pairs of weight * (f(i)-f(j))(f(i)-f(j))^T"
DOC_WEIGHT_TOL = 1e-10


class UsageError(Exception):
    pass


def _fmt_weight(w: float) -> str:
    return f"{w:.12g}"


@dataclass(frozen=True)
class DesignDocument:
    K: int
    support: tuple[tuple[int, str, str | None], ...]  # (depth, decimal weight, exact or None)
    h: tuple[float, float, float]
    logdet: float
    kw_max: float
    certified: bool
    version: str = __version__
    normalization: str = NORMALIZATION

    @classmethod
    def from_design(cls, design: DepthDesign) -> "DesignDocument":
        profile = kw_certify(design)
        support = tuple(
            (
                d,
                _fmt_weight(design.weights[d]),
                str(design.exact[d]) if design.exact is not None else None,
            )
            for d in design.support
        )
        return cls(
            K=design.K,
            support=support,
            h=tuple(info_diagonal(design)),
            logdet=log_det(design),
            kw_max=profile.kw_max,
            certified=profile.certified,
        )

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "support": [
                {"depth": d, "weight": w, "exact": e} for d, w, e in self.support
            ],
            "h": list(self.h),
            "logdet": self.logdet,
            "kw_max": self.kw_max,
            "certified": self.certified,
            "version": self.version,
            "normalization": self.normalization,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "DesignDocument":
        try:
            K = raw["K"]
            if not isinstance(K, int) or isinstance(K, bool):
                raise UsageError("K must be an integer")
            support = []
            for item in raw["support"]:
                d = item["depth"]
                w = item["weight"]
                e = item.get("exact")
                if not isinstance(d, int) or not isinstance(w, str):
                    raise UsageError("support entries need an integer depth and a string weight")
                if e is not None and not isinstance(e, str):
                    raise UsageError("exact weights must be strings such as '3/7'")
                support.append((d, w, e))
            h = tuple(float(x) for x in raw["h"])
            if len(h) != 3:
                raise UsageError("h must hold three values")
            return cls(
                K=K,
                support=tuple(support),
                h=h,
                logdet=float(raw["logdet"]),
                kw_max=float(raw["kw_max"]),
                certified=bool(raw["certified"]),
                version=str(raw.get("version", "")),
                normalization=str(raw.get("normalization", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed design document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "DesignDocument":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"design document is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("design document must be a JSON object")
        return cls.from_dict(raw)

    def to_design(self) -> DepthDesign:
        """Rebuild the depth design; exact weights win over decimal ones."""
        try:
            if self.support and all(e is not None for _, _, e in self.support):
                exact = {d: Fraction(e) for d, _, e in self.support}
                if sum(exact.values()) != 1:
                    raise UsageError(f"exact weights sum to {sum(exact.values())}, not 1")
                return DepthDesign(self.K, exact)
            weights = {d: float(w) for d, w, _ in self.support}
            total = math.fsum(weights.values())
            if abs(total - 1) > DOC_WEIGHT_TOL:
                raise UsageError(f"weights sum to {total!r}, not 1")
            return DepthDesign(self.K, {d: w / total for d, w in weights.items()})
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"invalid design: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_document(path: str) -> DesignDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return DesignDocument.from_json(text)


def cmd_design(args) -> int:
    if args.k < 3:
        raise UsageError("design needs --k >= 3")
    result = d_optimal_design(args.k)
    doc = DesignDocument.from_design(result.design)
    _emit(doc.to_json(), args.out)
    return 0 if doc.certified else 1


def cmd_check(args) -> int:
    design = _load_document(args.file).to_design()
    try:
        profile = kw_certify(design)
    except SingularDesignError as exc:
        print(f"singular design: {exc}")
        return 1
    lines = [f"K={profile.K} p={profile.p}", "d,v_over_p"]
    lines += [f"{d},{r:.12g}" for d, r in enumerate(profile.normalized)]
    lines.append(f"max v/p = {profile.kw_max:.12g}")
    lines.append("certified" if profile.certified else "NOT certified")
    print("\n".join(lines))
    return 0 if profile.certified else 1


def _table(rows: list[list[str]], as_csv: bool) -> str:
    if as_csv:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    widths = [max(len(r[c]) if c < len(r) else 0 for r in rows) for c in range(len(rows[0]))]
    return "".join(
        "  ".join(cell.rjust(widths[c]) for c, cell in enumerate(r)).rstrip() + "\n" for r in rows
    )


def cmd_table1(args) -> int:
    data = weight_rows(range(4, 11))
    if args.csv:
        rows = [["K", "w_K", "d_star", "w_d_star"]]
        rows += [[str(r.K), f"{r.w_K:.3f}", str(r.d_star), f"{r.w_d_star:.3f}"] for r in data]
    else:
        rows = [
            ["K"] + [str(r.K) for r in data],
            ["w_K*"] + [f"{r.w_K:.3f}" for r in data],
            ["d*"] + [str(r.d_star) for r in data],
            ["w_d*"] + [f"{r.w_d_star:.3f}" for r in data],
        ]
    _emit(_table(rows, args.csv), args.out)
    return 0


def cmd_table2(args) -> int:
    data = variance_rows(range(4, 11))
    if args.csv:
        rows = [["K", "d", "v_over_p"]]
        rows += [[str(K), str(d), f"{v:.3f}"] for K, vals in data.items() for d, v in enumerate(vals, 1)]
    else:
        rows = [["K"] + [str(d) for d in range(1, 11)]]
        for K, vals in data.items():
            rows.append([str(K)] + [f"{v:.3f}" for v in vals] + [""] * (10 - K))
    _emit(_table(rows, args.csv), args.out)
    return 0


def cmd_realize(args) -> int:
    design = _load_document(args.file).to_design()
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    exact = realize_exact(design, args.n)
    K = design.K
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"i_{k}" for k in range(1, K + 1)] + [f"j_{k}" for k in range(1, K + 1)])
    for pair in exact.pairs:
        writer.writerow(list(pair.first.levels) + list(pair.second.levels))
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_orbit(args) -> int:
    spec = ModelSpec(args.k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"i_{k}" for k in range(1, spec.K + 1)] + [f"j_{k}" for k in range(1, spec.K + 1)])
    for pair in enumerate_orbit(spec, args.d):
        writer.writerow(list(pair.first.levels) + list(pair.second.levels))
    _emit(buf.getvalue(), args.out)
    return 0


def _parse_beta(text: str | None, p: int) -> np.ndarray:
    if text is None:
        return np.ones(p)
    try:
        beta = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"--beta must be comma-separated numbers: {exc}") from exc
    if beta.shape != (p,):
        raise UsageError(f"--beta needs {p} values, got {beta.size}")
    return beta


def cmd_simulate(args) -> int:
    design = _load_document(args.file).to_design()
    spec = design.spec
    if args.n < 1 or args.reps < 1:
        raise UsageError("--n and --reps must be >= 1")
    cfg = SimulationConfig(
        beta=_parse_beta(args.beta, spec.p), sigma=args.sigma, seed=args.seed, replications=args.reps
    )
    exact = realize_exact(design, args.n)
    summary = monte_carlo(exact, cfg)
    out = {
        "K": spec.K,
        "N": args.n,
        "sigma": args.sigma,
        "seed": args.seed,
        "replications": args.reps,
        "exact_recovery": bool(np.max(np.abs(summary.beta_hat_mean - summary.beta)) <= 1e-10),
        **summary.to_dict(),
    }
    if args.compare:
        naive = monte_carlo(realize_exact(DepthDesign.point(spec.K, 1), args.n), cfg)
        ratio = naive.generalized_variance / summary.generalized_variance
        out["naive_generalized_variance"] = naive.generalized_variance
        out["efficiency_ratio"] = ratio ** (1 / spec.p) if ratio > 0 else float("nan")
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_probe(args) -> int:
    if args.kmax < 4:
        raise UsageError("--kmax must be >= 4")
    rows = [["K", "support", "expected_d_star", "matches", "certified", "kw_max", "error"]]
    for rec in conjecture_probe(args.kmax):
        rows.append(
            [
                str(rec.K),
                " ".join(str(d) for d in rec.support),
                str(rec.expected_depth),
                str(rec.matches).lower(),
                str(rec.certified).lower(),
                f"{rec.kw_max:.12g}",
                rec.error or "",
            ]
        )
    _emit(_table(rows, True), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairdesign",
        description="D-optimal paired comparison designs for binary attributes with "
        "second-order interactions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="construct and certify the D-optimal design")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("check", help="evaluate the variance function of a design document")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    for name, func, text in (
        ("table1", cmd_table1, "optimal depths and weights for K = 4..10"),
        ("table2", cmd_table2, "normalized variance function for K = 4..10"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--csv", action="store_true")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("realize", help="round a design document to N comparisons (CSV)")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("orbit", help="list all pairs of comparison depth d (CSV)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("simulate", help="Monte Carlo least-squares study of a design")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--beta", help="comma-separated true parameters (default: all ones)")
    p.add_argument("--compare", action="store_true", help="also run the uniform depth-1 design")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("probe", help="check the single-intermediate-depth pattern for K = 4..kmax")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
