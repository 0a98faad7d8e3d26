"""Machine-readable report assembly and markdown rendering.

The machine report is a single JSON document with fixed field names;
rendering to markdown never recomputes anything.
"""
from __future__ import annotations

import json


def _f(x: float) -> float | str:
    if x != x:
        return "nan"
    return float(x)


def _row_dict(row) -> dict:
    fit = row.full_fit
    return {
        "data": row.data,
        "direction": row.direction,
        "formula": row.formula,
        "n_obs": row.n_obs,
        "df": row.lrt.df,
        "chi2": _f(row.lrt.chi2),
        "p_value": _f(row.lrt.p_value),
        "aic_full": _f(row.aic_full),
        "aic_null": _f(row.aic_null),
        "loglik_full": _f(fit.loglik),
        "sigma2": _f(fit.sigma2),
        "sigma_b2": _f(fit.sigma_b2),
        "n_groups": fit.n_groups,
        "converged": fit.converged,
        "warnings": list(row.warnings),
    }


def _ols_dict(fit) -> dict:
    return {
        "columns": list(fit.columns),
        "estimates": [_f(b) for b in fit.beta],
        "std_errors": [_f(s) for s in fit.se],
        "t_values": [_f(t) for t in fit.t_values],
        "p_values": [_f(p) for p in fit.p_values],
        "df_resid": fit.df_resid,
        "f_statistic": _f(fit.f_statistic),
        "f_df": list(fit.f_df),
        "f_p_value": _f(fit.f_p_value),
        "r_squared": _f(fit.r_squared),
        "adj_r_squared": _f(fit.adj_r_squared),
        "loglik": _f(fit.loglik),
        "aic": _f(fit.aic),
        "n": fit.n,
    }


def build_machine_report(report, config_dict: dict, counts: dict | None = None) -> dict:
    doc = {
        "verdict": report.verdict,
        "alpha": report.alpha,
        "directionality": [_row_dict(r) for r in report.rows],
        "trigger_coefficients": [
            {"name": name, "estimate": _f(est), "std_error": _f(se), "t_value": _f(t)}
            for name, est, se, t in report.trigger_table],
        "harmony_summary": {
            k: (_f(v) if isinstance(v, float) else v)
            for k, v in report.harmony_summary.items()},
        "opaque_pair_count": report.opaque_pair_count,
        "opaque_excluded": [_row_dict(r) for r in report.opaque_excluded_rows],
        "config": config_dict,
    }
    if counts:
        doc["counts"] = dict(counts)
    if report.generated is not None:
        gen = report.generated
        doc["generated_items"] = {
            "dominant_trigger": gen.dominant_trigger,
            "trigger_table": [
                {"name": n, "estimate": _f(e), "t_value": _f(t), "p_value": _f(p)}
                for n, e, t, p in gen.trigger_table],
            "categorical_model": _ols_dict(gen.categorical_fit),
            "covariate_model": _ols_dict(gen.covariate_fit),
        }
    return doc


def dump_machine_report(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x, digits=6) -> str:
    if isinstance(x, str):
        return x
    return format(x, f".{digits}g")


def render_markdown(doc: dict) -> str:
    lines = ["# Vowel harmony directionality report", ""]
    lines.append(f"**Verdict: {doc['verdict']}** (alpha = {_fmt(doc['alpha'])})")
    lines.append("")
    lines.append("## Directionality tests")
    lines.append("")
    lines.append("| data | direction | fixed effects | n | df | chi2 | p | AIC full | AIC null |")
    lines.append("|---|---|---|---|---|---|---|---|---|")
    for row in doc["directionality"]:
        lines.append(
            f"| {row['data']} | {row['direction']} | `{row['formula']}` "
            f"| {row['n_obs']} | {row['df']} | {_fmt(row['chi2'])} "
            f"| {_fmt(row['p_value'])} | {_fmt(row['aic_full'])} "
            f"| {_fmt(row['aic_null'])} |")
    lines.append("")
    if doc["trigger_coefficients"]:
        lines.append("## Trigger coefficients (right-to-left full model)")
        lines.append("")
        lines.append("| coefficient | estimate | std. error | t |")
        lines.append("|---|---|---|---|")
        for c in doc["trigger_coefficients"]:
            lines.append(f"| {c['name']} | {_fmt(c['estimate'])} "
                         f"| {_fmt(c['std_error'])} | {_fmt(c['t_value'])} |")
        lines.append("")
    hs = doc["harmony_summary"]
    lines.append("## Harmony scores")
    lines.append("")
    lines.append(f"- scored pairs: {hs['n_scored']}")
    lines.append(f"- raised rate before +ATR triggers: "
                 f"{_fmt(hs['raised_rate_before_plus_atr'])}")
    lines.append(f"- raised rate before -ATR vowels: "
                 f"{_fmt(hs['raised_rate_before_minus_atr'])}")
    lines.append(f"- mean F1 lowering before +ATR: "
                 f"{_fmt(hs['mean_score_before_plus_atr'])} Hz")
    lines.append(f"- opaque (/a/) pairs retained and flagged: "
                 f"{doc['opaque_pair_count']}")
    lines.append("")
    if doc.get("opaque_excluded"):
        lines.append("## Re-run excluding opaque /a/ pairs")
        lines.append("")
        lines.append("| data | direction | df | chi2 | p |")
        lines.append("|---|---|---|---|---|")
        for row in doc["opaque_excluded"]:
            lines.append(f"| {row['data']} | {row['direction']} | {row['df']} "
                         f"| {_fmt(row['chi2'])} | {_fmt(row['p_value'])} |")
        lines.append("")
    if "generated_items" in doc:
        gen = doc["generated_items"]
        lines.append("## Generated items (OLS)")
        lines.append("")
        lines.append(f"Dominant trigger: **{gen['dominant_trigger']}**")
        lines.append("")
        lines.append("| V2 coefficient | estimate | t | p |")
        lines.append("|---|---|---|---|")
        for c in gen["trigger_table"]:
            lines.append(f"| {c['name']} | {_fmt(c['estimate'])} "
                         f"| {_fmt(c['t_value'])} | {_fmt(c['p_value'])} |")
        cat = gen["categorical_model"]
        lines.append("")
        lines.append(f"Categorical model: F({cat['f_df'][0]}, {cat['f_df'][1]}) = "
                     f"{_fmt(cat['f_statistic'])}, p = {_fmt(cat['f_p_value'])}, "
                     f"adj. R^2 = {_fmt(cat['adj_r_squared'])}")
        lines.append("")
    return "\n".join(lines) + "\n"
