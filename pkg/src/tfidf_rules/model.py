"""Trained model container and its text file format.

::

    lambda=10.0
    eta=1.0
    alpha=1:1.0,0:1.0
    trained_on=614
    label=label,1
    feature=plasma_glucose,numeric
    bins=plasma_glucose:99.5,127.5,166.5
    IF plasma_glucose:127.5_to_166.5 AND body_mass_index:29.65_to_inf THEN n1=18 n0=5
    ELSE n1=19 n0=16

``alpha`` is written as ``label:value`` pairs so the class order is explicit.
Rule conditions keep the order they were printed in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .dataset import BinBoundary, DataError, FeatureSchema, format_number
from .rulelist import ClassCounts, PriorConfig, RuleList
from .rulemine import Rule

_RULE_RE = re.compile(r"^IF (?P<conds>.+) THEN n1=(?P<n1>\d+) n0=(?P<n0>\d+)$")
_ELSE_RE = re.compile(r"^ELSE n1=(?P<n1>\d+) n0=(?P<n0>\d+)$")


@dataclass(frozen=True)
class Model:
    rule_list: RuleList
    schema: FeatureSchema
    boundaries: dict
    prior: PriorConfig
    trained_on: int

    @property
    def rules(self):
        return self.rule_list.rules

    @property
    def alpha(self):
        return self.prior.alpha

    def dumps(self) -> str:
        a1, a0 = self.prior.alpha
        lines = [
            f"lambda={self.prior.lam!r}",
            f"eta={self.prior.eta!r}",
            f"alpha=1:{a1!r},0:{a0!r}",
            f"trained_on={self.trained_on}",
            f"label={self.schema.label_column},{self.schema.positive_label}",
        ]
        lines += [f"feature={name},{kind}" for name, kind in self.schema.features]
        for name in self.schema.numeric:
            cuts = self.boundaries[name].cut_points
            lines.append(f"bins={name}:" + ",".join(format_number(c) for c in cuts))
        for rule, c in zip(self.rule_list.rules, self.rule_list.counts):
            lines.append(f"IF {' AND '.join(rule.conditions)} THEN n1={c.n1} n0={c.n0}")
        d = self.rule_list.counts[-1]
        lines.append(f"ELSE n1={d.n1} n0={d.n0}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Model":
        header: dict[str, str] = {}
        features, bins, rules, counts = [], {}, [], []
        default = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if default is not None:
                raise DataError(f"model line {lineno}: content after the ELSE line")
            if m := _RULE_RE.match(line):
                rules.append(Rule.parse(m["conds"]))
                counts.append(ClassCounts(int(m["n1"]), int(m["n0"])))
            elif m := _ELSE_RE.match(line):
                default = ClassCounts(int(m["n1"]), int(m["n0"]))
            elif "=" in line and not rules:
                key, _, value = line.partition("=")
                if key == "feature":
                    name, _, kind = value.partition(",")
                    features.append((name, kind))
                elif key == "bins":
                    name, _, cuts = value.partition(":")
                    bins[name] = BinBoundary(name, tuple(float(c) for c in cuts.split(",") if c))
                else:
                    header[key] = value
            else:
                raise DataError(f"model line {lineno}: cannot parse {line!r}")
        if default is None:
            raise DataError("model has no ELSE line")
        for key in ("lambda", "eta", "alpha", "trained_on", "label"):
            if key not in header:
                raise DataError(f"model header is missing {key}=")
        alpha = dict(part.split(":") for part in header["alpha"].split(","))
        prior = PriorConfig(float(header["lambda"]), float(header["eta"]), (float(alpha["1"]), float(alpha["0"])))
        label_col, _, positive = header["label"].partition(",")
        schema = FeatureSchema(tuple(features), label_col, positive)
        missing = [n for n in schema.numeric if n not in bins]
        if missing:
            raise DataError(f"model has no bins= line for {missing}")
        rule_list = RuleList(tuple(rules), tuple(counts) + (default,))
        return cls(rule_list, schema, bins, prior, int(header["trained_on"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read model {path}: {exc}") from exc
        return cls.loads(text)
