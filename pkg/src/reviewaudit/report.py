"""CSV ingestion, audit orchestration, and report serialization.

The audit pipeline runs each analysis section independently: agreement,
per-question chi-square, team comparison (t test for two teams, ANOVA for
more), error-rate extrapolation (overall and per reviewer), bias factors,
and optionally difference-in-differences. A section that fails is recorded
as a structured error without aborting the others.

Reports are plain JSON-compatible structures. Floating-point values are
rounded to 12 significant digits when the report is assembled, which makes
emission byte-deterministic and the emit/parse round trip lossless. The
JSON schema is documented in docs/report_schema.md and versioned by the
top-level schema_version field.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from . import __version__
from .agreement import OVERALL_KAPPA_MODES, AgreementReport, KappaResult, analyze_agreement
from .did import DidPanel, DidResult, did_estimate
from .errors import (
    CsvFormatError,
    MissingGroundTruthError,
    ReviewAuditError,
)
from .estimation import (
    CI_METHODS,
    BiasFactorReport,
    BinomialInterval,
    bias_factor_report,
    binomial_ci,
)
from .hypotheses import TestResult, chi_square_independence, one_way_anova, two_sample_t
from .model import ReviewDataset, ReviewRecord, contingency_from
from .simulate import DidPair

SCHEMA_VERSION = 1

REQUIRED_COLUMNS = (
    "product_id",
    "reviewer_id",
    "question_id",
    "answer",
    "final_classification",
)


def _round12(value):
    """Round floats to 12 significant digits, recursively; tuples become lists."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, Mapping):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    raise TypeError(f"unsupported report value type {type(value)!r}")


# --- ingestion ---------------------------------------------------------------

def _open_source(source: str | IO[str]) -> IO[str]:
    if isinstance(source, str):
        return open(source, "r", encoding="utf-8", newline="")
    return source


def ingest_csv(source: str | IO[str]) -> list[ReviewRecord]:
    """Read long-format review records from a CSV path or stream.

    Required columns: product_id, reviewer_id, question_id, answer,
    final_classification. Optional: team (blank means none) and period
    (integer). Errors name the offending column and file line.
    """
    stream = _open_source(source)
    close = isinstance(source, str)
    try:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise CsvFormatError("empty file: no header row")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise CsvFormatError(
                f"missing required column(s): {', '.join(missing)}",
                column=missing[0],
            )
        records: list[ReviewRecord] = []
        for row in reader:
            line = reader.line_num
            for col in REQUIRED_COLUMNS:
                if not (row[col] or "").strip():
                    raise CsvFormatError(
                        f"empty {col} on row {line}", row=line, column=col
                    )
            team = (row.get("team") or "").strip() or None
            period_raw = (row.get("period") or "").strip()
            period: int | None = None
            if period_raw:
                try:
                    period = int(period_raw)
                except ValueError:
                    raise CsvFormatError(
                        f"unparseable period {period_raw!r} on row {line}",
                        row=line,
                        column="period",
                    ) from None
            records.append(
                ReviewRecord(
                    product_id=row["product_id"].strip(),
                    reviewer_id=row["reviewer_id"].strip(),
                    question_id=row["question_id"].strip(),
                    answer=row["answer"].strip(),
                    final_classification=row["final_classification"].strip(),
                    team=team,
                    period=period,
                )
            )
        if not records:
            raise CsvFormatError("no data rows")
        return records
    finally:
        if close:
            stream.close()


def read_ground_truth_csv(source: str | IO[str]) -> dict[str, str]:
    """Read product_id -> classification pairs."""
    stream = _open_source(source)
    close = isinstance(source, str)
    try:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise CsvFormatError("empty ground-truth file")
        for col in ("product_id", "classification"):
            if col not in reader.fieldnames:
                raise CsvFormatError(f"ground-truth file missing column {col!r}", column=col)
        truth: dict[str, str] = {}
        for row in reader:
            product = (row["product_id"] or "").strip()
            label = (row["classification"] or "").strip()
            if not product or not label:
                raise CsvFormatError(f"blank ground-truth entry on row {reader.line_num}",
                                     row=reader.line_num)
            truth[product] = label
        if not truth:
            raise CsvFormatError("ground-truth file has no data rows")
        return truth
    finally:
        if close:
            stream.close()


def write_panel_csv(
    stream: IO[str],
    panels: Sequence[tuple[str | None, Iterable[ReviewRecord]]],
) -> None:
    """Write records as CSV; a group column is added when any panel names one."""
    with_group = any(group is not None for group, _ in panels)
    header = list(REQUIRED_COLUMNS) + ["team", "period"]
    if with_group:
        header.append("group")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for group, records in panels:
        for rec in records:
            row = [
                rec.product_id,
                rec.reviewer_id,
                rec.question_id,
                rec.answer,
                rec.final_classification,
                rec.team or "",
                "" if rec.period is None else str(rec.period),
            ]
            if with_group:
                row.append(group or "")
            writer.writerow(row)


def write_ground_truth_csv(stream: IO[str], truth: Mapping[str, str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["product_id", "classification"])
    for product in sorted(truth):
        writer.writerow([product, truth[product]])


def read_outcome_panel_csv(source: str | IO[str]) -> list[tuple[str, int, float]]:
    """Read (group, period, outcome) observations for DiD estimation."""
    stream = _open_source(source)
    close = isinstance(source, str)
    try:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise CsvFormatError("empty file: no header row")
        for col in ("group", "period", "outcome"):
            if col not in reader.fieldnames:
                raise CsvFormatError(f"missing required column(s): {col}", column=col)
        rows: list[tuple[str, int, float]] = []
        for row in reader:
            line = reader.line_num
            try:
                rows.append(
                    (
                        (row["group"] or "").strip(),
                        int((row["period"] or "").strip()),
                        float((row["outcome"] or "").strip()),
                    )
                )
            except ValueError:
                raise CsvFormatError(
                    f"unparseable period/outcome on row {line}", row=line
                ) from None
        if not rows:
            raise CsvFormatError("no data rows")
        return rows
    finally:
        if close:
            stream.close()


# --- payload builders --------------------------------------------------------

def kappa_payload(result: KappaResult) -> dict:
    return {
        "kappa": result.kappa,
        "p_bar": result.p_bar,
        "p_e_bar": result.p_e_bar,
        "n_subjects": result.n_subjects,
        "n_raters": result.n_raters,
        "n_categories": result.n_categories,
    }


def agreement_payload(report: AgreementReport) -> dict:
    return {
        "status": "ok",
        "overall_mode": report.overall_mode,
        "overall_kappa": report.overall_kappa,
        "overall_detail": (
            None if report.overall_detail is None else kappa_payload(report.overall_detail)
        ),
        "agreement_rate": report.agreement_rate,
        "per_question": {q: kappa_payload(r) for q, r in report.per_question.items()},
        "annotations": dict(report.annotations),
        "disagreement_ranking": list(report.disagreement_ranking),
        "notes": list(report.notes),
    }


def test_payload(result: TestResult) -> dict:
    df = result.df
    if isinstance(df, tuple):
        df = list(df)
    return {
        "test_kind": result.test_kind,
        "statistic": result.statistic,
        "df": df,
        "p_value": result.p_value,
        "tail": result.tail,
        "alpha": result.alpha,
        "reject_null": result.reject_null,
        "warnings": list(result.warnings),
    }


def interval_payload(interval: BinomialInterval) -> dict:
    return {
        "x": interval.x,
        "n": interval.n,
        "level": interval.level,
        "lower": interval.lower,
        "upper": interval.upper,
        "method": interval.method,
    }


def bias_payload(report: BiasFactorReport) -> dict:
    return {
        "status": "ok",
        "target_labels": list(report.target_labels),
        "n_rows": report.n_rows,
        "factors": list(report.factors),
        "ranked_by": report.ranked_by,
        "ols_intercept": report.ols_intercept,
        "logistic_intercept": report.logistic_intercept,
        "ols_error": report.ols_error,
        "logistic_error": report.logistic_error,
        "effects": [
            {
                "name": e.name,
                "ols_coefficient": e.ols_coefficient,
                "logistic_coefficient": e.logistic_coefficient,
            }
            for e in report.effects
        ],
    }


def did_payload(result: DidResult) -> dict:
    return {
        "status": "ok",
        "effect": result.effect,
        "treated_pre_mean": result.treated_pre_mean,
        "treated_post_mean": result.treated_post_mean,
        "control_pre_mean": result.control_pre_mean,
        "control_post_mean": result.control_post_mean,
        "counterfactual": [[p, v] for p, v in result.counterfactual],
        "per_group_series": {
            group: [[p, v] for p, v in series]
            for group, series in result.per_group_series.items()
        },
        "effect_se": result.effect_se,
    }


# --- audit pipeline ----------------------------------------------------------

@dataclass(frozen=True)
class AuditReport:
    """Assembled audit report; all fields are JSON-compatible structures."""

    schema_version: int
    toolkit_version: str
    config: dict
    dataset_summary: dict
    sections: dict

    def section(self, name: str) -> dict:
        return self.sections[name]

    def statuses(self) -> dict[str, str]:
        return {name: body["status"] for name, body in self.sections.items()}


def _unit_majorities(dataset: ReviewDataset) -> dict[tuple[str, str], str]:
    votes: dict[tuple[str, str], dict[str, int]] = {}
    for rec in dataset.records:
        key = (rec.product_id, rec.reviewer_id)
        counts = votes.setdefault(key, {})
        counts[rec.final_classification] = counts.get(rec.final_classification, 0) + 1
    return {
        key: min(counts, key=lambda c: (-counts[c], c)) for key, counts in votes.items()
    }


def _unit_error_outcomes(
    dataset: ReviewDataset, ground_truth: Mapping[str, str] | None
) -> tuple[dict[tuple[str, str], int], str]:
    """0/1 misclassification indicator per (product, reviewer) unit.

    Compared against ground truth when supplied, otherwise against the
    product's consensus classification (majority across reviewers, ties
    lexicographic).
    """
    majorities = _unit_majorities(dataset)
    if ground_truth is not None:
        basis = "ground_truth"
        reference = {}
        for (product, _), _label in majorities.items():
            if product not in ground_truth:
                raise MissingGroundTruthError(product)
            reference[product] = ground_truth[product]
    else:
        basis = "consensus"
        by_product: dict[str, dict[str, int]] = {}
        for (product, _), label in majorities.items():
            counts = by_product.setdefault(product, {})
            counts[label] = counts.get(label, 0) + 1
        reference = {
            product: min(counts, key=lambda c: (-counts[c], c))
            for product, counts in by_product.items()
        }
    outcomes = {
        key: (0 if label == reference[key[0]] else 1)
        for key, label in majorities.items()
    }
    return outcomes, basis


def _unit_teams(dataset: ReviewDataset) -> dict[tuple[str, str], str | None]:
    teams: dict[tuple[str, str], str | None] = {}
    for rec in dataset.records:
        key = (rec.product_id, rec.reviewer_id)
        if key not in teams:
            teams[key] = rec.team
    return teams


def _agreement_section(dataset: ReviewDataset, mode: str) -> dict:
    try:
        return agreement_payload(analyze_agreement(dataset, mode))
    except ReviewAuditError as exc:
        return {"status": "error", "error": str(exc)}


def _chi_square_section(dataset: ReviewDataset, alpha: float, yates: bool) -> dict:
    per_question = {}
    n_ok = 0
    for q in dataset.questions:
        try:
            table = contingency_from(dataset, q)
            result = chi_square_independence(table, alpha=alpha, yates=yates)
            per_question[q] = {"status": "ok", **test_payload(result)}
            n_ok += 1
        except ReviewAuditError as exc:
            per_question[q] = {"status": "error", "error": str(exc)}
    if n_ok == 0:
        return {
            "status": "error",
            "error": "no question yields a testable contingency table",
            "per_question": per_question,
        }
    return {"status": "ok", "per_question": per_question}


def _team_section(
    dataset: ReviewDataset,
    outcomes: dict[tuple[str, str], int] | None,
    basis: str | None,
    outcome_error: str | None,
    alpha: float,
) -> dict:
    unit_teams = _unit_teams(dataset)
    teams = sorted({t for t in unit_teams.values() if t is not None})
    if not teams:
        return {"status": "skipped", "reason": "no team data"}
    if len(teams) == 1:
        return {"status": "skipped", "reason": f"single team {teams[0]!r}"}
    if outcomes is None:
        return {"status": "error", "error": outcome_error or "unit outcomes unavailable"}
    groups = {
        team: [
            float(outcomes[key])
            for key in sorted(outcomes)
            if unit_teams.get(key) == team
        ]
        for team in teams
    }
    payload = {
        "outcome_basis": basis,
        "teams": teams,
        "group_sizes": {team: len(groups[team]) for team in teams},
        "group_error_rates": {
            team: (sum(groups[team]) / len(groups[team]) if groups[team] else None)
            for team in teams
        },
    }
    try:
        if len(teams) == 2:
            result = two_sample_t(groups[teams[0]], groups[teams[1]], alpha=alpha)
            return {"status": "ok", "test": test_payload(result), **payload}
        result, decomposition = one_way_anova([groups[t] for t in teams], alpha=alpha)
        return {
            "status": "ok",
            "test": test_payload(result),
            "anova": {
                "ss_treatment": decomposition.ss_treatment,
                "ss_error": decomposition.ss_error,
                "ms_treatment": decomposition.ms_treatment,
                "ms_error": decomposition.ms_error,
                "group_means": list(decomposition.group_means),
                "grand_mean": decomposition.grand_mean,
            },
            **payload,
        }
    except (ReviewAuditError, ValueError) as exc:
        return {"status": "error", "error": str(exc), **payload}


def _extrapolation_section(
    dataset: ReviewDataset,
    outcomes: dict[tuple[str, str], int] | None,
    basis: str | None,
    outcome_error: str | None,
    method: str,
    level: float,
) -> dict:
    if outcomes is None:
        return {"status": "error", "error": outcome_error or "unit outcomes unavailable"}
    if not outcomes:
        return {"status": "skipped", "reason": "no units to extrapolate"}
    groups: dict[str, list[int]] = {"all": []}
    for (product, reviewer), err in sorted(outcomes.items()):
        groups["all"].append(err)
        groups.setdefault(f"reviewer:{reviewer}", []).append(err)
    intervals = {}
    for name in sorted(groups):
        values = groups[name]
        intervals[name] = interval_payload(
            binomial_ci(sum(values), len(values), level=level, method=method)
        )
    return {"status": "ok", "outcome_basis": basis, "groups": intervals}


def _bias_section(dataset: ReviewDataset) -> dict:
    try:
        return bias_payload(bias_factor_report(dataset))
    except (ReviewAuditError, ValueError) as exc:
        return {"status": "error", "error": str(exc)}


def _did_section(did_panel: DidPanel | DidPair | None) -> dict:
    if did_panel is None:
        return {"status": "skipped", "reason": "no difference-in-differences input"}
    try:
        if isinstance(did_panel, DidPair):
            from .did import did_with_error_rates

            result = did_with_error_rates(
                did_panel.treated,
                did_panel.control,
                did_panel.ground_truth,
                did_panel.change_period,
            )
        else:
            result = did_estimate(did_panel)
        return did_payload(result)
    except ReviewAuditError as exc:
        return {"status": "error", "error": str(exc)}


def run_audit(
    dataset: ReviewDataset,
    ground_truth: Mapping[str, str] | None = None,
    alpha: float = 0.05,
    overall_kappa_mode: str = "pooled",
    ci_method: str = "clopper_pearson",
    ci_level: float = 0.95,
    yates: bool = False,
    did_panel: DidPanel | DidPair | None = None,
) -> AuditReport:
    """Run every audit section over a validated dataset.

    Sections are independent: one failing is recorded as a structured
    error and the rest still run. The call itself raises only if the
    arguments are invalid.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if overall_kappa_mode not in OVERALL_KAPPA_MODES:
        raise ValueError(
            f"overall_kappa_mode must be one of {OVERALL_KAPPA_MODES}, "
            f"got {overall_kappa_mode!r}"
        )
    if ci_method not in CI_METHODS:
        raise ValueError(f"ci_method must be one of {CI_METHODS}, got {ci_method!r}")
    if not (0.0 < ci_level < 1.0):
        raise ValueError(f"ci_level must be in (0, 1), got {ci_level}")

    outcomes = None
    basis = None
    outcome_error = None
    try:
        outcomes, basis = _unit_error_outcomes(dataset, ground_truth)
    except ReviewAuditError as exc:
        outcome_error = str(exc)

    sections = {
        "agreement": _agreement_section(dataset, overall_kappa_mode),
        "chi_square": _chi_square_section(dataset, alpha, yates),
        "team_comparison": _team_section(dataset, outcomes, basis, outcome_error, alpha),
        "error_extrapolation": _extrapolation_section(
            dataset, outcomes, basis, outcome_error, ci_method, ci_level
        ),
        "bias_factors": _bias_section(dataset),
        "did": _did_section(did_panel),
    }
    config = {
        "alpha": alpha,
        "overall_kappa_mode": overall_kappa_mode,
        "ci_method": ci_method,
        "ci_level": ci_level,
        "yates": yates,
        "ground_truth_provided": ground_truth is not None,
    }
    summary = dataset.summary
    dataset_summary = {
        "n_records": summary.n_records,
        "n_input_records": summary.n_input_records,
        "n_dropped_cells": summary.n_dropped_cells,
        "n_dropped_records": summary.n_dropped_records,
        "incomplete_cell_policy": summary.policy,
        "n_products": len(dataset.products),
        "n_reviewers": len(dataset.reviewers),
        "n_questions": len(dataset.questions),
        "n_raters": dataset.n_raters,
    }
    return AuditReport(
        schema_version=SCHEMA_VERSION,
        toolkit_version=__version__,
        config=_round12(config),
        dataset_summary=_round12(dataset_summary),
        sections=_round12(sections),
    )


# --- serialization -----------------------------------------------------------

def emit_report(report: AuditReport, fmt: str = "json") -> str:
    """Serialize a report: canonical JSON (sorted keys) or readable text."""
    if fmt == "json":
        payload = {
            "schema_version": report.schema_version,
            "toolkit_version": report.toolkit_version,
            "config": report.config,
            "dataset_summary": report.dataset_summary,
            "sections": report.sections,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        return render_text(report)
    raise ValueError(f"format must be 'json' or 'text', got {fmt!r}")


def parse_report(text: str) -> AuditReport:
    """Inverse of emit_report(fmt="json")."""
    payload = json.loads(text)
    return AuditReport(
        schema_version=payload["schema_version"],
        toolkit_version=payload["toolkit_version"],
        config=payload["config"],
        dataset_summary=payload["dataset_summary"],
        sections=payload["sections"],
    )


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_text(report: AuditReport) -> str:
    """Human-readable rendering; the disagreement ranking leads."""
    out = io.StringIO()
    w = out.write
    w(f"REVIEW AUDIT REPORT (schema {report.schema_version}, "
      f"toolkit {report.toolkit_version})\n")
    ds = report.dataset_summary
    w(
        f"dataset: {ds['n_records']} records, {ds['n_products']} products, "
        f"{ds['n_reviewers']} reviewers, {ds['n_questions']} questions"
    )
    if ds["n_dropped_cells"]:
        w(f" ({ds['n_dropped_cells']} incomplete cells dropped)")
    w("\n\n")

    agreement = report.sections["agreement"]
    w("== Disagreement ranking (highest disagreement first) ==\n")
    if agreement["status"] == "ok":
        for rank, q in enumerate(agreement["disagreement_ranking"], start=1):
            kappa = agreement["per_question"][q]["kappa"]
            w(f"  {rank}. {q}  kappa={_fmt(kappa)}\n")
        for q, note in agreement["annotations"].items():
            w(f"  -- {q}: {note}\n")
    else:
        w(f"  unavailable: {agreement.get('error')}\n")

    w("\n== Agreement ==\n")
    if agreement["status"] == "ok":
        w(f"  overall kappa ({agreement['overall_mode']}): "
          f"{_fmt(agreement['overall_kappa'])}\n")
        w(f"  consensus agreement rate: {_fmt(agreement['agreement_rate'])}\n")
        for note in agreement["notes"]:
            w(f"  note: {note}\n")

    chi = report.sections["chi_square"]
    w("\n== Chi-square: answer vs classification ==\n")
    if "per_question" in chi:
        for q, body in chi["per_question"].items():
            if body["status"] == "ok":
                w(
                    f"  {q}: statistic={_fmt(body['statistic'])} df={body['df']} "
                    f"p={_fmt(body['p_value'])} reject@{body['alpha']}="
                    f"{body['reject_null']}"
                )
                if body["warnings"]:
                    w(f"  [{'; '.join(body['warnings'])}]")
                w("\n")
            else:
                w(f"  {q}: error: {body['error']}\n")
    else:
        w(f"  unavailable: {chi.get('error')}\n")

    team = report.sections["team_comparison"]
    w("\n== Team comparison ==\n")
    if team["status"] == "ok":
        test = team["test"]
        w(
            f"  {test['test_kind']}: statistic={_fmt(test['statistic'])} "
            f"df={test['df']} p={_fmt(test['p_value'])} "
            f"reject@{test['alpha']}={test['reject_null']}\n"
        )
        w(f"  outcome basis: {team['outcome_basis']}\n")
        for t in team["teams"]:
            w(
                f"  team {t}: n={team['group_sizes'][t]} "
                f"error_rate={_fmt(team['group_error_rates'][t])}\n"
            )
    elif team["status"] == "skipped":
        w(f"  skipped: {team['reason']}\n")
    else:
        w(f"  error: {team.get('error')}\n")

    extrapolation = report.sections["error_extrapolation"]
    w("\n== Error-rate extrapolation ==\n")
    if extrapolation["status"] == "ok":
        w(f"  outcome basis: {extrapolation['outcome_basis']}\n")
        for name, body in extrapolation["groups"].items():
            w(
                f"  {name}: {body['x']}/{body['n']} errors, "
                f"{body['level']:.0%} CI [{_fmt(body['lower'])}, {_fmt(body['upper'])}] "
                f"({body['method']})\n"
            )
    elif extrapolation["status"] == "skipped":
        w(f"  skipped: {extrapolation['reason']}\n")
    else:
        w(f"  error: {extrapolation.get('error')}\n")

    bias = report.sections["bias_factors"]
    w("\n== Bias factors (ranked by influence) ==\n")
    if bias["status"] == "ok":
        w(f"  target: {bias['target_labels'][0]} vs {bias['target_labels'][1]} "
          f"over {bias['n_rows']} units, ranked by {bias['ranked_by']}\n")
        for effect in bias["effects"]:
            w(
                f"  {effect['name']}: ols={_fmt(effect['ols_coefficient'])} "
                f"logistic={_fmt(effect['logistic_coefficient'])}\n"
            )
        if bias["ols_error"]:
            w(f"  ols error: {bias['ols_error']}\n")
        if bias["logistic_error"]:
            w(f"  logistic error: {bias['logistic_error']}\n")
    else:
        w(f"  error: {bias.get('error')}\n")

    did = report.sections["did"]
    w("\n== Difference-in-differences ==\n")
    if did["status"] == "ok":
        w(f"  effect: {_fmt(did['effect'])}\n")
        w(
            f"  treated: pre={_fmt(did['treated_pre_mean'])} "
            f"post={_fmt(did['treated_post_mean'])}; "
            f"control: pre={_fmt(did['control_pre_mean'])} "
            f"post={_fmt(did['control_post_mean'])}\n"
        )
        for group, series in did["per_group_series"].items():
            pairs = " ".join(f"({p}, {_fmt(v)})" for p, v in series)
            w(f"  actual {group} series: {pairs}\n")
        pairs = " ".join(f"({p}, {_fmt(v)})" for p, v in did["counterfactual"])
        w(f"  counterfactual series: {pairs}\n")
        if did["effect_se"] is not None:
            w(f"  bootstrap SE: {_fmt(did['effect_se'])}\n")
    elif did["status"] == "skipped":
        w(f"  skipped: {did['reason']}\n")
    else:
        w(f"  error: {did.get('error')}\n")
    return out.getvalue()
