"""Command-line interface.

Subcommands: agreement, chisq, ttest, anova, ci, regress, did, simulate,
and audit (the full pipeline). Output is canonical JSON by default or a
text rendering with --format text. Exit codes: 0 success, 1 partial (an
analysis section errored), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from typing import IO, Mapping

from . import __version__
from .agreement import analyze_agreement
from .did import DidPanel, did_estimate, did_with_error_rates
from .errors import (
    ConfigError,
    CsvFormatError,
    DatasetValidationError,
    ReviewAuditError,
)
from .estimation import bias_factor_report, binomial_ci
from .hypotheses import chi_square_independence, one_way_anova, two_sample_t
from .model import ReviewDataset, contingency_from, validate_dataset
from .report import (
    _round12,
    _unit_error_outcomes,
    _unit_teams,
    agreement_payload,
    bias_payload,
    did_payload,
    emit_report,
    ingest_csv,
    interval_payload,
    read_ground_truth_csv,
    read_outcome_panel_csv,
    render_text,
    run_audit,
    test_payload,
    write_ground_truth_csv,
    write_panel_csv,
)
from .simulate import SimulationConfig, inject_review_change, simulate_panel

CI_METHOD_FLAGS = {"clopper-pearson": "clopper_pearson", "wilson": "wilson"}
KAPPA_MODE_FLAGS = {"pooled": "pooled", "mean": "mean_of_questions"}


def _emit(payload: dict, args, out: IO[str]) -> None:
    if args.format == "json":
        out.write(json.dumps(_round12(payload), sort_keys=True, indent=2) + "\n")
    else:
        _write_text(payload, out)


def _write_text(payload, out: IO[str], indent: int = 0) -> None:
    pad = "  " * indent
    if isinstance(payload, Mapping):
        for key in payload:
            value = payload[key]
            if isinstance(value, (Mapping, list)):
                out.write(f"{pad}{key}:\n")
                _write_text(value, out, indent + 1)
            else:
                out.write(f"{pad}{key}: {value}\n")
    elif isinstance(payload, list):
        for value in payload:
            if isinstance(value, (Mapping, list)):
                _write_text(value, out, indent)
            else:
                out.write(f"{pad}- {value}\n")
    else:
        out.write(f"{pad}{payload}\n")


def _load_dataset(args) -> ReviewDataset:
    records = ingest_csv(args.input)
    return validate_dataset(records, policy=args.policy)


def _maybe_truth(args) -> dict[str, str] | None:
    path = getattr(args, "ground_truth", None)
    return read_ground_truth_csv(path) if path else None


def _team_samples(dataset: ReviewDataset, truth) -> dict[str, list[float]]:
    outcomes, _basis = _unit_error_outcomes(dataset, truth)
    unit_teams = _unit_teams(dataset)
    teams = sorted({t for t in unit_teams.values() if t is not None})
    if len(teams) < 2:
        raise DatasetValidationError(
            f"team comparison needs >= 2 teams, found {len(teams)}"
        )
    return {
        team: [
            float(outcomes[key]) for key in sorted(outcomes) if unit_teams[key] == team
        ]
        for team in teams
    }


def _cmd_agreement(args, out: IO[str]) -> int:
    dataset = _load_dataset(args)
    payload = agreement_payload(
        analyze_agreement(dataset, KAPPA_MODE_FLAGS[args.overall_kappa])
    )
    _emit(payload, args, out)
    return 0


def _cmd_chisq(args, out: IO[str]) -> int:
    dataset = _load_dataset(args)
    questions = [args.question] if args.question else list(dataset.questions)
    per_question = {}
    n_ok = 0
    for q in questions:
        try:
            result = chi_square_independence(
                contingency_from(dataset, q), alpha=args.alpha, yates=args.yates
            )
            per_question[q] = {"status": "ok", **test_payload(result)}
            n_ok += 1
        except ReviewAuditError as exc:
            per_question[q] = {"status": "error", "error": str(exc)}
    _emit({"per_question": per_question}, args, out)
    return 0 if n_ok == len(questions) else 1


def _cmd_ttest(args, out: IO[str]) -> int:
    dataset = _load_dataset(args)
    groups = _team_samples(dataset, _maybe_truth(args))
    teams = sorted(groups)
    if len(teams) != 2:
        raise DatasetValidationError(
            f"t test compares exactly 2 teams, found {len(teams)}; use anova"
        )
    result = two_sample_t(
        groups[teams[0]], groups[teams[1]],
        variant=args.variant, tail=args.tail, alpha=args.alpha,
    )
    _emit({"teams": teams, "test": test_payload(result)}, args, out)
    return 0


def _cmd_anova(args, out: IO[str]) -> int:
    dataset = _load_dataset(args)
    groups = _team_samples(dataset, _maybe_truth(args))
    teams = sorted(groups)
    result, decomposition = one_way_anova([groups[t] for t in teams], alpha=args.alpha)
    _emit(
        {
            "teams": teams,
            "test": test_payload(result),
            "anova": {
                "ss_treatment": decomposition.ss_treatment,
                "ss_error": decomposition.ss_error,
                "ms_treatment": decomposition.ms_treatment,
                "ms_error": decomposition.ms_error,
                "group_means": list(decomposition.group_means),
                "grand_mean": decomposition.grand_mean,
            },
        },
        args,
        out,
    )
    return 0


def _cmd_ci(args, out: IO[str]) -> int:
    method = CI_METHOD_FLAGS[args.ci_method]
    if args.x is not None or args.n is not None:
        if args.x is None or args.n is None:
            raise ValueError("--x and --n must be given together")
        interval = binomial_ci(args.x, args.n, level=args.level, method=method)
        _emit(interval_payload(interval), args, out)
        return 0
    if not args.input:
        raise ValueError("provide either --x/--n or --input")
    dataset = _load_dataset(args)
    outcomes, basis = _unit_error_outcomes(dataset, _maybe_truth(args))
    groups: dict[str, list[int]] = {"all": []}
    for (product, reviewer), err in sorted(outcomes.items()):
        groups["all"].append(err)
        groups.setdefault(f"reviewer:{reviewer}", []).append(err)
    payload = {
        "outcome_basis": basis,
        "groups": {
            name: interval_payload(
                binomial_ci(sum(vals), len(vals), level=args.level, method=method)
            )
            for name, vals in sorted(groups.items())
        },
    }
    _emit(payload, args, out)
    return 0


def _cmd_regress(args, out: IO[str]) -> int:
    dataset = _load_dataset(args)
    factors = args.factors.split(",") if args.factors else None
    payload = bias_payload(bias_factor_report(dataset, factors))
    _emit(payload, args, out)
    return 0


def _split_by_group(path: str) -> dict[str, list]:
    """Split a review CSV carrying a group column into per-group records."""
    with open(path, "r", encoding="utf-8", newline="") as stream:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None or "group" not in reader.fieldnames:
            raise CsvFormatError("review-format DiD input needs a 'group' column",
                                 column="group")
        rows = list(reader)
    groups: dict[str, list] = {}
    for row in rows:
        groups.setdefault((row.get("group") or "").strip(), []).append(row)
    header = [c for c in reader.fieldnames if c != "group"]
    records = {}
    for group, group_rows in groups.items():
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        for row in group_rows:
            writer.writerow({k: row[k] for k in header})
        buf.seek(0)
        records[group] = ingest_csv(buf)
    return records


def _cmd_did(args, out: IO[str]) -> int:
    with open(args.input, "r", encoding="utf-8", newline="") as probe:
        header_line = probe.readline()
    fields = [f.strip() for f in header_line.strip().split(",")]
    if "outcome" in fields:
        observations = read_outcome_panel_csv(args.input)
        panel = DidPanel(
            observations=tuple(observations), change_period=args.change_period
        )
        result = did_estimate(panel, period_balanced=args.period_balanced)
    else:
        if not args.ground_truth:
            raise ValueError(
                "review-format DiD input needs --ground-truth for error rates"
            )
        by_group = _split_by_group(args.input)
        missing = {"treated", "control"} - set(by_group)
        if missing:
            raise DatasetValidationError(
                f"DiD input lacks group(s): {sorted(missing)}"
            )
        truth = read_ground_truth_csv(args.ground_truth)
        result = did_with_error_rates(
            validate_dataset(by_group["treated"], policy=args.policy),
            validate_dataset(by_group["control"], policy=args.policy),
            truth,
            args.change_period,
            period_balanced=args.period_balanced,
        )
    _emit(did_payload(result), args, out)
    return 0


def _cmd_simulate(args, out: IO[str]) -> int:
    with open(args.config, "r", encoding="utf-8") as stream:
        config = SimulationConfig.from_json(stream)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.did_pair:
        pair = inject_review_change(config)
        panels = [
            ("control", pair.control.records),
            ("treated", pair.treated.records),
        ]
        truth = pair.ground_truth
    else:
        dataset, truth = simulate_panel(config)
        panels = [(None, dataset.records)]
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as stream:
            write_panel_csv(stream, panels)
    else:
        write_panel_csv(out, panels)
    if args.truth_output:
        with open(args.truth_output, "w", encoding="utf-8", newline="") as stream:
            write_ground_truth_csv(stream, truth)
    return 0


def _cmd_audit(args, out: IO[str]) -> int:
    dataset = _load_dataset(args)
    did_panel = None
    if args.did_input:
        observations = read_outcome_panel_csv(args.did_input)
        if args.change_period is None:
            raise ValueError("--did-input requires --change-period")
        did_panel = DidPanel(
            observations=tuple(observations), change_period=args.change_period
        )
    report = run_audit(
        dataset,
        ground_truth=_maybe_truth(args),
        alpha=args.alpha,
        overall_kappa_mode=KAPPA_MODE_FLAGS[args.overall_kappa],
        ci_method=CI_METHOD_FLAGS[args.ci_method],
        ci_level=args.level,
        yates=args.yates,
        did_panel=did_panel,
    )
    if args.format == "json":
        out.write(emit_report(report, "json"))
    else:
        out.write(render_text(report))
    return 1 if any(s == "error" for s in report.statuses().values()) else 0


def _add_common(parser, with_input=True):
    if with_input:
        parser.add_argument("--input", required=True, help="long-format review CSV")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--policy", choices=("drop", "strict"), default="drop",
                        help="incomplete-cell policy (default: drop)")
    parser.add_argument("--output", default=None, help="write to file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewaudit",
        description="Quantify human-reviewer audit risk from long-format review CSVs.",
    )
    parser.add_argument("--version", action="version", version=f"reviewaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("agreement", help="Fleiss kappa per question and overall")
    _add_common(p)
    p.add_argument("--overall-kappa", choices=tuple(KAPPA_MODE_FLAGS), default="pooled")
    p.set_defaults(func=_cmd_agreement)

    p = sub.add_parser("chisq", help="chi-square answer/classification independence")
    _add_common(p)
    p.add_argument("--question", default=None, help="test a single question")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--yates", action="store_true", help="apply continuity correction")
    p.set_defaults(func=_cmd_chisq)

    p = sub.add_parser("ttest", help="two-team error-rate comparison")
    _add_common(p)
    p.add_argument("--ground-truth", default=None, help="product_id,classification CSV")
    p.add_argument("--variant", choices=("pooled", "welch"), default="welch")
    p.add_argument("--tail", choices=("upper", "lower", "two_sided"), default="two_sided")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_ttest)

    p = sub.add_parser("anova", help="multi-team error-rate comparison")
    _add_common(p)
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_anova)

    p = sub.add_parser("ci", help="binomial confidence interval for error rates")
    _add_common(p, with_input=False)
    p.add_argument("--input", default=None, help="long-format review CSV")
    p.add_argument("--x", type=int, default=None, help="error count")
    p.add_argument("--n", type=int, default=None, help="sample size")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--ci-method", choices=tuple(CI_METHOD_FLAGS), default="clopper-pearson")
    p.add_argument("--ground-truth", default=None)
    p.set_defaults(func=_cmd_ci)

    p = sub.add_parser("regress", help="bias-factor OLS and logistic coefficients")
    _add_common(p)
    p.add_argument("--factors", default=None,
                   help="comma-separated question ids and/or 'team' (default: all questions)")
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser("did", help="difference-in-differences estimate")
    _add_common(p)
    p.add_argument("--change-period", type=int, required=True,
                   help="first post-change period")
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--period-balanced", action="store_true",
                   help="weight periods equally within eras")
    p.set_defaults(func=_cmd_did)

    p = sub.add_parser("simulate", help="generate a synthetic review panel")
    p.add_argument("--config", required=True, help="JSON simulation config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--output", default=None, help="panel CSV path (default stdout)")
    p.add_argument("--truth-output", default=None, help="ground-truth CSV path")
    p.add_argument("--did-pair", action="store_true",
                   help="emit paired treated/control panels with the configured treatment")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("audit", help="full audit pipeline")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--overall-kappa", choices=tuple(KAPPA_MODE_FLAGS), default="pooled")
    p.add_argument("--ci-method", choices=tuple(CI_METHOD_FLAGS), default="clopper-pearson")
    p.add_argument("--level", type=float, default=0.95, help="confidence level for CIs")
    p.add_argument("--yates", action="store_true")
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--did-input", default=None,
                   help="group,period,outcome CSV for the DiD section")
    p.add_argument("--change-period", type=int, default=None)
    p.set_defaults(func=_cmd_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "output", None) and args.command != "simulate":
            with open(args.output, "w", encoding="utf-8") as out:
                return args.func(args, out)
        return args.func(args, sys.stdout)
    except (CsvFormatError, ConfigError, DatasetValidationError, FileNotFoundError,
            ValueError) as exc:
        print(f"reviewaudit: invalid input: {exc}", file=sys.stderr)
        return 2
    except ReviewAuditError as exc:
        print(f"reviewaudit: analysis failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
