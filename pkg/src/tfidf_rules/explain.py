"""First-match prediction and plain-text explanations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .dataset import CATEGORICAL, NULL, NUMERIC, DataError, format_number, parse_range, parse_value, split_token, tokenize_row
from .model import Model
from .rulelist import ClassCounts
from .rulemine import Rule

HEADER = "Prob. of {app} is {probability} because"
ABSOLUTE = "{feature} is {value}"
BELOW = "{feature} ({raw}) is below {hi}"
BETWEEN = "{feature} ({raw}) is between {lo} to {hi}"
ABOVE = "{feature} ({raw}) is above {lo}"
NO_RULE = "no specific rule matched"


@dataclass(frozen=True)
class Prediction:
    probability: float
    triggered_index: int  # == len(model.rules) for the default rule
    triggered_rule: Rule | None
    counts: ClassCounts
    tokens: tuple[str, ...] = ()

    @property
    def is_default(self) -> bool:
        return self.triggered_rule is None


def slot_probability(counts: ClassCounts, alpha) -> float:
    a1, a0 = alpha
    return (counts.n1 + a1) / (counts.n1 + counts.n0 + a1 + a0)


def _as_row(model: Model, sample) -> tuple:
    """Order a sample (mapping or sequence) by the model schema, parsing strings."""
    schema = model.schema
    if isinstance(sample, Mapping):
        missing = [n for n in schema.names if n not in sample]
        if missing:
            raise DataError(f"sample is missing features {missing}")
        values = [sample[n] for n in schema.names]
    else:
        values = list(sample)
        if len(values) != len(schema.names):
            raise DataError(f"sample has {len(values)} values, schema has {len(schema.names)} features")
    row = []
    for v, (name, kind) in zip(values, schema.features):
        if isinstance(v, str):
            v = parse_value(v, kind)
        elif v is None:
            v = math.nan if kind == NUMERIC else NULL
        elif kind == NUMERIC:
            v = float(v)
        else:
            v = str(v)
        row.append(v)
    return tuple(row)


def predict(model: Model, sample) -> Prediction:
    """Score one raw sample against the first rule it satisfies."""
    row = _as_row(model, sample)
    tokens = tokenize_row(row, model.schema, model.boundaries)
    present = set(tokens)
    rules = model.rule_list.rules
    for j, rule in enumerate(rules):
        if rule.matches(present):
            c = model.rule_list.counts[j]
            return Prediction(slot_probability(c, model.alpha), j, rule, c, tokens)
    c = model.rule_list.counts[-1]
    return Prediction(slot_probability(c, model.alpha), len(rules), None, c, tokens)


def predict_many(model: Model, rows: Sequence) -> list[Prediction]:
    return [predict(model, r) for r in rows]


def format_probability(p: float) -> str:
    """Two decimals with trailing zeros dropped: 0.76, 0.3, 0.5."""
    s = f"{p:.2f}".rstrip("0")
    return s + "0" if s.endswith(".") else s


def condition_shape(token: str) -> str:
    """One of ``absolute``, ``below``, ``between``, ``above``."""
    _, value = split_token(token)
    bounds = parse_range(value)
    if bounds is None:
        return "absolute"
    lo, hi = bounds
    if lo == -math.inf and hi == math.inf:
        return "absolute"
    if lo == -math.inf:
        return "below"
    if hi == math.inf:
        return "above"
    return "between"


def _format_raw(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return NULL
    return format_number(float(value))


def render_condition(token: str, raw_value=None, kind: str = NUMERIC) -> str:
    """One condition in words; categorical features always use the absolute form."""
    feature, value = split_token(token)
    shape = "absolute" if kind == CATEGORICAL else condition_shape(token)
    if shape == "absolute":
        return ABSOLUTE.format(feature=feature, value=value)
    lo_s, _, hi_s = value.partition("_to_")
    raw = _format_raw(raw_value)
    template = {"below": BELOW, "between": BETWEEN, "above": ABOVE}[shape]
    return template.format(feature=feature, raw=raw, lo=lo_s, hi=hi_s)


def render_explanation(model: Model, prediction: Prediction, sample, application_name: str) -> str:
    header = HEADER.format(app=application_name, probability=format_probability(prediction.probability))
    if prediction.triggered_rule is None:
        return f"{header} {NO_RULE}"
    row = _as_row(model, sample)
    raw = dict(zip(model.schema.names, row))
    kinds = dict(model.schema.features)
    parts = []
    for tok in prediction.triggered_rule.conditions:
        name = split_token(tok)[0]
        parts.append(render_condition(tok, raw.get(name), kinds.get(name, NUMERIC)))
    return f"{header} " + " and ".join(parts)


def explain(model: Model, sample, application_name: str) -> tuple[Prediction, str]:
    pred = predict(model, sample)
    return pred, render_explanation(model, pred, sample, application_name)


def render_model(model: Model, application_name: str = "positive class") -> str:
    """IF / ELSE IF / ELSE listing with per-rule probabilities in percent."""
    lines = []
    rl = model.rule_list
    for j, (rule, c) in enumerate(zip(rl.rules, rl.counts)):
        keyword = "IF" if j == 0 else "ELSE IF"
        pct = 100.0 * slot_probability(c, model.alpha)
        lines.append(f"{keyword} {' AND '.join(rule.conditions)} THEN probability of {application_name}: {pct:.1f}%")
    pct = 100.0 * slot_probability(rl.counts[-1], model.alpha)
    lines.append(f"ELSE probability of {application_name}: {pct:.1f}%")
    return "\n".join(lines) + "\n"
