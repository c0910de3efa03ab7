"""
Estimator reports over symbol files.

Commands:
    norm        both norm estimates, their ratio and a sampled lower bound
    essnorm     the four essential-norm variants and compact-approximation gaps
    classify    bounded / compact verdicts with evidence
    audit       inequality rows per pair plus the composition library
    nevanlinna  counting-function checks for polynomial self-maps
    sweep       norm, essnorm, classify, nevanlinna and audit summaries over
                the corpus, plus a summary table of every ratio column

Usage:
    python src/bloch_wco/harness/run_report.py norm --pair data/seeds/corpus/identity_one.json
    python src/bloch_wco/harness/run_report.py sweep --out data/reports/sweep.csv
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import polars as pl

# Add src to path for config import
sys.path.insert(0, str(Path(__file__).parent.parent.parent))
from config import ESTIMATOR_CONFIG, PATHS, QUADRATURE_CONFIG, RUN_CONFIG, SUP_CONFIG

from bloch_wco import __version__
from bloch_wco.analytic_core import Z
from bloch_wco.errors import BlochToolkitError, InvalidParameter, NotBounded, UnsupportedSymbol
from bloch_wco.estimators import (
    Thresholds,
    classify,
    compact_approximation_gap,
    essnorm_estimate,
    norm_estimate,
    opnorm_lower_bound,
    zhao_quantities,
)
from bloch_wco.functionals import (
    AuditControls,
    AuditTable,
    FunctionalProfile,
    ProfileSettings,
    SymbolPair,
    build_profile,
    composition_audit,
    inequality_audit,
)
from bloch_wco.harness.corpus import CorpusEntry, load_corpus, load_entries
from bloch_wco.nevanlinna import (
    change_of_variable_ratio,
    composition_product_bounds,
    littlewood_check,
    polynomial_map_from_expr,
    sublog_bound_check,
)
from bloch_wco.quadrature import SupGrid, build_rule
from bloch_wco.utils import configure_logging, parallel_map

logger = logging.getLogger(__name__)

COMMANDS = ("norm", "essnorm", "classify", "audit", "nevanlinna", "sweep")

# Columns summarized after a sweep
SUMMARY_COLUMNS = (
    "estimate_ratio",
    "upper_lower_ratio",
    "variant_ratio",
    "zhao.composition_essnorm",
    "audit.max_measured_constant",
    "audit.min_margin",
    "littlewood.min_margin",
    "cov_ratio",
    "garsia_ratio[u]",
    "littlewood_paley[u]",
)

Columns = Tuple[Dict[str, Any], List[str]]


@dataclass(frozen=True)
class RunContext:
    settings: ProfileSettings
    controls: AuditControls
    thresholds: Thresholds
    seed: int
    samples: int
    workers: int

    def describe(self) -> dict:
        return {
            **self.settings.describe(),
            "seed": self.seed,
            "lower_bound_samples": self.samples,
            "eps_compact": self.thresholds.eps_compact,
            "divergence_threshold": self.thresholds.divergence,
            "growth_ratio": self.thresholds.growth_ratio,
            "audit_constant": self.controls.constant,
        }


@dataclass(frozen=True)
class RatioReport:
    command: str
    rows: pl.DataFrame
    meta: dict
    ok: int
    total: int
    summary: Optional[pl.DataFrame] = None


# =============================================================================
# ROW SECTIONS
# =============================================================================

def _put_complex(row: dict, name: str, value: Optional[complex]) -> None:
    row[f"{name}_re"] = None if value is None else float(complex(value).real)
    row[f"{name}_im"] = None if value is None else float(complex(value).imag)


def _ratio(num: float, den: float) -> Optional[float]:
    if den > 0.0 and math.isfinite(den):
        return num / den
    return None


def norm_columns(pair: SymbolPair, profile: FunctionalProfile, ctx: RunContext) -> Columns:
    row, flags = {}, []
    estimates = [norm_estimate(pair, method, profile) for method in ("alpha_beta", "power_beta")]
    for est in estimates:
        row[est.method] = est.value
        for name, value in est.parts.items():
            row[f"{est.method}.{name}"] = value
        if est.diverged:
            flags.append(f"diverged:{est.method}")
    if not estimates[0].metadata["converged"]:
        flags.append("not_converged:sup_search")
    _put_complex(row, "sup_alpha_at", profile.sup_alpha.argmax)
    _put_complex(row, "sup_beta_at", profile.sup_beta.argmax)

    lower = opnorm_lower_bound(pair, ctx.samples, ctx.seed, ctx.settings, ctx.controls)
    row["lower_bound"] = lower.value
    row["lower_bound_witness"] = lower.witness
    row["lower_bound_skipped"] = lower.skipped
    if lower.skipped:
        flags.append(f"lower_bound_skipped:{lower.skipped}")
    row["estimate_ratio"] = _ratio(estimates[0].value, estimates[1].value)
    row["upper_lower_ratio"] = _ratio(estimates[0].value, lower.value)
    if row["estimate_ratio"] is None or row["upper_lower_ratio"] is None:
        flags.append("ratio_undefined")
    return row, flags


def essnorm_columns(pair: SymbolPair, profile: FunctionalProfile, ctx: RunContext,
                    with_gaps: bool = False, raise_unbounded: bool = True) -> Columns:
    try:
        report = essnorm_estimate(pair, profile, thresholds=ctx.thresholds)
    except NotBounded:
        if raise_unbounded:
            raise
        return {}, ["not_bounded"]
    row = dict(report.variants)
    row["variant_ratio"] = report.ratio
    for name, value in report.components.items():
        row[f"ess.{name}"] = None if report.vacuous.get(name) else value
    flags = [f"vacuous:{k}" for k, v in report.vacuous.items() if v]
    flags += [f"below_tol:{k}" for k, v in report.below_tol.items() if v]
    if with_gaps:
        for n, gap in compact_approximation_gap(pair, settings=ctx.settings, controls=ctx.controls).items():
            row[f"gap[n={n}]"] = gap
    return row, flags


def classify_columns(pair: SymbolPair, profile: FunctionalProfile, ctx: RunContext) -> Columns:
    verdict = classify(pair, ctx.thresholds, profile)
    row = {"bounded": verdict.bounded.value, "compact": verdict.compact.value}
    for name, (value, _) in verdict.evidence.items():
        row[f"evidence.{name}"] = value
    return row, []


def zhao_columns(pair: SymbolPair, profile: FunctionalProfile, ctx: RunContext) -> Columns:
    z = zhao_quantities(pair, profile)
    row = {
        "zhao.composition_essnorm": z.composition_essnorm,
        "zhao.phi_power_tail": z.phi_power_tail,
        "zhao.derivative_ratio": None if z.derivative_ratio.vacuous else z.derivative_ratio.approximant,
        "zhao.log_derivative": None if z.log_derivative.vacuous else z.log_derivative.approximant,
    }
    flags = [f"vacuous:zhao.{q.quantity}" for q in (z.derivative_ratio, z.log_derivative) if q.vacuous]
    return row, flags


def nevanlinna_columns(pair: SymbolPair, ctx: RunContext) -> Columns:
    try:
        phi = polynomial_map_from_expr(pair.phi, validate=False)
    except (UnsupportedSymbol, InvalidParameter):
        return {}, ["not_polynomial"]
    rule = ctx.settings.rule
    row: Dict[str, Any] = {"degree": phi.degree}
    _put_complex(row, "phi0", phi.at_zero)
    if phi.at_zero != 0:
        margins = []
        for gamma in (1.0, 2.0):
            for fraction in (0.25, 0.5):
                margin = littlewood_check(phi, gamma, fraction * abs(phi.at_zero), rule)
                row[f"littlewood[gamma={gamma:g},r={fraction:g}]"] = margin
                margins.append(margin)
        row["littlewood.min_margin"] = min(margins)
    else:
        row["sublog_margin"] = sublog_bound_check(phi)
        bounds = composition_product_bounds(phi, rule)
        row["mobius_margin"] = bounds.mobius_margin
        row["counting_margin"] = bounds.counting_margin
    cov = change_of_variable_ratio(Z, phi, rule)
    row["cov_lhs"], row["cov_rhs"], row["cov_ratio"] = cov.lhs, cov.rhs, cov.ratio
    return row, []


def audit_records(table: AuditTable, tol: float) -> List[Dict[str, Any]]:
    records = []
    for r in table.rows:
        rec = {"check": r.check, "lhs": r.lhs, "rhs": r.rhs, "constant": r.constant,
               "margin": r.margin, "ratio": r.ratio, "holds": r.holds(tol)}
        _put_complex(rec, "witness", r.witness)
        rec["note"] = r.note or None
        records.append(rec)
    return records


def audit_summary_columns(table: AuditTable, tol: float) -> Columns:
    margins = [r.margin for r in table.rows if not math.isnan(r.margin)]
    measured = [r.ratio for r in table.rows if r.constant != 1.0 and not math.isnan(r.ratio)]
    row = {
        "audit.holds": table.holds(tol),
        "audit.min_margin": min(margins) if margins else None,
        "audit.max_measured_constant": max(measured) if measured else None,
    }
    for check in ("garsia[u]", "littlewood_paley[u]"):
        if check in table.checks():
            key = "garsia_ratio[u]" if check.startswith("garsia") else check
            row[key] = table.row(check).ratio
    failed = [r.check for r in table.rows if not r.holds(tol)]
    return row, [f"audit_fail:{c}" for c in failed]


# =============================================================================
# PER-PAIR DRIVER
# =============================================================================

def _base_row(entry: CorpusEntry) -> Dict[str, Any]:
    row = {"label": entry.label, "file": entry.path.name, "status": "ok",
           "error_kind": None, "error_message": None}
    if entry.pair is not None:
        row["sup_modulus"] = entry.pair.report.sup_modulus
        row["boundary_contact"] = entry.pair.report.boundary_contact
    return row


def _error_row(row: Dict[str, Any], error: Exception) -> Dict[str, Any]:
    return {**row, "status": "error", "error_kind": type(error).__name__, "error_message": str(error)}


def run_pair(command: str, entry: CorpusEntry, ctx: RunContext) -> List[Dict[str, Any]]:
    """Rows for one pair; failures become a single error row."""
    row = _base_row(entry)
    if not entry.ok:
        return [_error_row(row, entry.error)]
    pair = entry.pair
    sections: List[Columns] = []
    try:
        if command == "nevanlinna":
            sections.append(nevanlinna_columns(pair, ctx))
        elif command == "norm":
            profile = build_profile(pair, ctx.settings, boundary_terms=False)
            sections.append(norm_columns(pair, profile, ctx))
        else:
            profile = build_profile(pair, ctx.settings)
            if command == "essnorm":
                sections.append(essnorm_columns(pair, profile, ctx, with_gaps=True))
            elif command == "classify":
                sections.append(classify_columns(pair, profile, ctx))
                sections.append(zhao_columns(pair, profile, ctx))
            elif command == "audit":
                table = inequality_audit(pair, ctx.controls, profile)
                return [{**row, **rec} for rec in audit_records(table, ctx.controls.tol)]
            elif command == "sweep":
                sections.append(norm_columns(pair, profile, ctx))
                sections.append(essnorm_columns(pair, profile, ctx, raise_unbounded=False))
                sections.append(classify_columns(pair, profile, ctx))
                sections.append(zhao_columns(pair, profile, ctx))
                try:
                    sections.append(nevanlinna_columns(pair, ctx))
                except BlochToolkitError as e:
                    sections.append(({}, [f"nevanlinna_error:{type(e).__name__}"]))
                table = inequality_audit(pair, ctx.controls, profile)
                sections.append(audit_summary_columns(table, ctx.controls.tol))
            else:
                raise InvalidParameter(f"unknown command {command!r}")
    except Exception as e:
        logger.warning("%s failed on %s: %s", command, entry.label, e)
        return [_error_row(row, e)]

    flags = []
    for columns, section_flags in sections:
        row.update(columns)
        flags.extend(section_flags)
    row["flags"] = ";".join(flags) or None
    return [row]


# =============================================================================
# TABLES AND FILES
# =============================================================================

def _cell(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    if isinstance(value, complex):
        return str(value)
    return value


def to_frame(rows: Sequence[Dict[str, Any]]) -> pl.DataFrame:
    """Union of keys in first-seen order; missing cells are null."""
    columns: List[str] = []
    seen = set()
    for row in rows:
        for key in row:
            if key not in seen:
                seen.add(key)
                columns.append(key)
    data = {c: [_cell(row.get(c)) for row in rows] for c in columns}
    return pl.DataFrame(data, strict=False)


def summarize(df: pl.DataFrame, composition: Optional[AuditTable] = None) -> pl.DataFrame:
    """count/min/median/max and max/min spread of every ratio column over ok rows."""
    ok = df.filter(pl.col("status") == "ok") if "status" in df.columns else df
    rows = []
    for column in SUMMARY_COLUMNS:
        if column not in ok.columns:
            continue
        s = ok.get_column(column).cast(pl.Float64, strict=False).drop_nulls()
        s = s.filter(s.is_finite())
        if len(s) == 0:
            rows.append({"metric": column, "count": 0, "min": None, "median": None, "max": None, "spread": None})
            continue
        lo, hi = float(s.min()), float(s.max())
        rows.append({"metric": column, "count": len(s), "min": lo, "median": float(s.median()),
                     "max": hi, "spread": hi / lo if lo > 0 else None})
    if composition is not None:
        ratios = [r.ratio for r in composition.rows if r.check.startswith("composition[") and r.ratio > 0]
        if ratios:
            rows.append({"metric": "composition_ratio", "count": len(ratios), "min": min(ratios),
                         "median": float(np.median(ratios)), "max": max(ratios),
                         "spread": max(ratios) / min(ratios)})
    return to_frame(rows)


def write_table(df: pl.DataFrame, path: Path, fmt: str, meta: dict) -> Path:
    """CSV with a one-line '#' header holding the run metadata, or JSON with a meta block."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        header = "# " + json.dumps(meta, sort_keys=True, default=str) + "\n"
        path.write_text(header + df.write_csv(float_precision=12), encoding="utf-8")
    elif fmt == "json":
        doc = {"meta": meta, "rows": df.to_dicts()}
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    else:
        raise InvalidParameter(f"unknown format {fmt!r}")
    print(f"✓ Saved {len(df):,} rows to: {path}")
    return path


def run_report(command: str, entries: Sequence[CorpusEntry], ctx: RunContext,
               out: Optional[Path] = None, fmt: str = "csv") -> RatioReport:
    """
    Run a command over the entries and optionally write the report.

    Pairs run concurrently; rows come back in input order. With out set,
    the table goes to out and, for sweep, the summary to
    <out stem>_summary<suffix> next to it.
    """
    if command not in COMMANDS:
        raise InvalidParameter(f"unknown command {command!r}, expected one of {COMMANDS}")
    per_pair = parallel_map(lambda entry: run_pair(command, entry, ctx), entries, ctx.workers)

    rows = [row for group in per_pair for row in group]
    composition = None
    if command in ("audit", "sweep"):
        composition = composition_audit(rule=ctx.settings.rule, constant=ctx.controls.constant)
        if command == "audit":
            base = {"label": "composition", "file": None, "status": "ok", "error_kind": None, "error_message": None}
            rows.extend({**base, **rec} for rec in audit_records(composition, ctx.controls.tol))

    ok = sum(1 for group in per_pair if group and group[0]["status"] == "ok")
    meta = {
        "tool": "bloch_wco",
        "version": __version__,
        "command": command,
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": ctx.describe(),
    }
    df = to_frame(rows)
    summary = summarize(df, composition) if command == "sweep" else None
    report = RatioReport(command, df, meta, ok, len(entries), summary)

    if out is not None:
        out = Path(out)
        write_table(df, out, fmt, meta)
        if summary is not None:
            write_table(summary, out.with_name(f"{out.stem}_summary{out.suffix}"), fmt, meta)
    return report


# =============================================================================
# CLI ENTRY POINT
# =============================================================================

def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Norm and essential-norm reports for weighted composition operators")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--pair", action="append", default=None, metavar="FILE",
                    help="symbol file (repeatable); defaults to the bundled corpus")
    ap.add_argument("--radial", type=int, default=QUADRATURE_CONFIG["radial_nodes"])
    ap.add_argument("--angular", type=int, default=QUADRATURE_CONFIG["angular_nodes"])
    ap.add_argument("--sup-grid", type=int, default=SUP_CONFIG["boundary_levels"], metavar="LEVELS")
    ap.add_argument("--powers", type=int, default=ESTIMATOR_CONFIG["powers"])
    ap.add_argument("--levels", type=_float_list, default=list(ESTIMATOR_CONFIG["levels"]))
    ap.add_argument("--tlevels", type=_float_list, default=list(ESTIMATOR_CONFIG["t_levels"]))
    ap.add_argument("--seed", type=int, default=RUN_CONFIG["seed"])
    ap.add_argument("--samples", type=int, default=ESTIMATOR_CONFIG["lower_bound_samples"])
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=("csv", "json"), default=RUN_CONFIG["format"])
    ap.add_argument("--tol", type=float, default=RUN_CONFIG["tol"])
    ap.add_argument("--workers", type=int, default=RUN_CONFIG["workers"])
    ap.add_argument("--log-level", default=RUN_CONFIG["log_level"])
    return ap


def context_from_args(args: argparse.Namespace) -> RunContext:
    if not 0 <= args.seed < 2 ** 64:
        raise InvalidParameter(f"seed must be an unsigned 64-bit integer, got {args.seed}")
    if args.workers < 1:
        raise InvalidParameter("workers must be >= 1")
    settings = ProfileSettings(
        rule=build_rule(args.radial, args.angular),
        sup_grid=SupGrid(boundary_levels=args.sup_grid),
        powers=args.powers,
        tail_window=min(ESTIMATOR_CONFIG["tail_window"], args.powers + 1),
        levels=tuple(args.levels),
        t_levels=tuple(args.tlevels),
        tol=args.tol,
        workers=1,
    )
    return RunContext(settings, AuditControls(), Thresholds(), args.seed, args.samples, args.workers)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    print("\n" + "=" * 60)
    print(f"Bloch Report: {args.command}")
    print("=" * 60 + "\n")

    try:
        ctx = context_from_args(args)
        entries = load_entries(args.pair) if args.pair else load_corpus()
    except (InvalidParameter, FileNotFoundError) as e:
        print(f"✗ {e}")
        return 2

    out = Path(args.out) if args.out else PATHS["reports"] / f"{args.command}.{args.format}"
    report = run_report(args.command, entries, ctx, out, args.format)

    statuses = {}
    if "status" in report.rows.columns:
        for rec in report.rows.select(["label", "status", "error_kind", "error_message"]).to_dicts():
            statuses.setdefault(rec["label"], rec)
    for entry in entries:
        rec = statuses.get(entry.label)
        if rec is None or rec["status"] == "ok":
            print(f"✓ {entry.label}")
        else:
            print(f"✗ {entry.label}: {rec['error_kind']}: {rec['error_message']}")

    print(f"\n{report.ok}/{report.total} pairs ok")
    print("\n" + "=" * 60 + "\n")
    return 0 if report.ok or not entries else 1


if __name__ == "__main__":
    raise SystemExit(main())
