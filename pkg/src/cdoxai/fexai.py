"""Fuzzy winner-take-all rule classifier over the top three features.

Each of the three driver features carries three trapezoidal fuzzy sets whose
0.5-crossings sit exactly on the published projection thresholds
(mdrate 0.026/0.044, flt_segments 238/767, mdirection 1.375/2.125). Inputs
fuzzify by winner-take-all, training rows each stamp one IF-THEN rule, and
inference matches a test antecedent against the rule base, falling back to
the highest product-activation rule when no antecedent matches exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyRuleBase,
    EmptyTraining,
    NonFiniteValue,
    OutOfRange,
    RuleParseError,
)
from .features import LOW
from .forest import NOT_LOW, CvReport, Metrics, SCENARIOS, evaluate, stratified_kfold

# Canonical order of the rule features and their set vocabularies.
RULE_FEATURES = ("mdrate", "flt_segments", "mdirection")

FUZZY_SETS: dict[str, tuple[str, ...]] = {
    "mdrate": ("Low", "Medium", "High"),
    "flt_segments": ("Few", "Moderate", "Many"),
    "mdirection": ("Straight", "Moderate", "Complex"),
}

DEFAULT_THRESHOLDS: dict[str, tuple[float, float]] = {
    "mdrate": (0.026, 0.044),
    "flt_segments": (238.0, 767.0),
    "mdirection": (1.375, 2.125),
}

# Shoulders sit this fraction of the inter-threshold gap either side of each
# 0.5-crossing; winner-take-all outcomes do not depend on the choice.
SHOULDER_FRACTION = 0.25

RULE_FEATURE_LABELS = {"mdrate": "MDRate", "flt_segments": "FltSegments", "mdirection": "MDirection"}
CONSEQUENT_LABELS = {LOW: "Low", NOT_LOW: "Not Low"}
_CONSEQUENT_FROM_LABEL = {v: k for k, v in CONSEQUENT_LABELS.items()}


@dataclass(frozen=True)
class MembershipFunction:
    """Three piecewise-linear fuzzy sets forming a strong partition.

    The lower set plateaus at 1 left of its crossing band, the upper set
    right of its band, and the middle set between the bands; inside a band
    the two adjacent sets are complementary and cross at exactly 0.5 on the
    threshold.
    """

    feature: str
    set_names: tuple[str, str, str]
    thresholds: tuple[float, float]
    shoulder_fraction: float = SHOULDER_FRACTION

    @property
    def half_width(self) -> float:
        t1, t2 = self.thresholds
        return self.shoulder_fraction * (t2 - t1)

    def degrees(self, value: float) -> tuple[float, float, float]:
        if not np.isfinite(value):
            raise NonFiniteValue(f"{self.feature}: value {value!r} is not finite")
        t1, t2 = self.thresholds
        h = self.half_width

        def rising(v, center):
            # 0 at center-h, 1 at center+h; written around the midpoint so
            # the crossing is exactly 0.5 at the threshold itself
            return float(np.clip(0.5 + (v - center) / (2.0 * h), 0.0, 1.0))

        low = 1.0 - rising(value, t1)
        mid = min(rising(value, t1), 1.0 - rising(value, t2))
        high = rising(value, t2)
        return (low, mid, high)

    def winner(self, value: float) -> str:
        """Set with maximal degree; exact-threshold ties go to the upper set."""
        degs = self.degrees(value)
        best = 0
        for i in (1, 2):
            if degs[i] >= degs[best]:
                best = i
        return self.set_names[best]


def default_memberships(
    thresholds: dict[str, tuple[float, float]] | None = None,
) -> dict[str, MembershipFunction]:
    thresholds = thresholds or DEFAULT_THRESHOLDS
    return {
        feat: MembershipFunction(feat, FUZZY_SETS[feat], tuple(thresholds[feat]))
        for feat in RULE_FEATURES
    }


_DEFAULT_MF = default_memberships()


def membership_degrees(
    feature: str, value: float, memberships: dict[str, MembershipFunction] | None = None
) -> tuple[float, float, float]:
    """Degrees of the feature's three fuzzy sets at the given value."""
    mf = (memberships or _DEFAULT_MF)[feature]
    return mf.degrees(value)


def winner_take_all(
    feature: str, value: float, memberships: dict[str, MembershipFunction] | None = None
) -> str:
    """Label of the maximal-membership fuzzy set for the value."""
    mf = (memberships or _DEFAULT_MF)[feature]
    return mf.winner(value)


def fuzzify(
    values, memberships: dict[str, MembershipFunction] | None = None
) -> tuple[str, str, str]:
    """Winner-take-all antecedent triple for (mdrate, flt_segments, mdirection)."""
    mfs = memberships or _DEFAULT_MF
    return tuple(mfs[feat].winner(v) for feat, v in zip(RULE_FEATURES, values))


@dataclass(frozen=True)
class FuzzyRule:
    antecedent: tuple[str, str, str]
    consequent: str  # LOW or NOT_LOW
    support: int = 1


@dataclass
class RuleBase:
    """Rules with unique antecedents, at most 27, in a stable order."""

    rules: list[FuzzyRule] = field(default_factory=list)
    fallback_policy: str = "max_product_activation"

    def __post_init__(self):
        seen = set()
        for rule in self.rules:
            if rule.antecedent in seen:
                raise ValueError(f"duplicate antecedent {rule.antecedent}")
            seen.add(rule.antecedent)

    def __len__(self) -> int:
        return len(self.rules)

    def lookup(self, antecedent: tuple[str, str, str]) -> FuzzyRule | None:
        for rule in self.rules:
            if rule.antecedent == antecedent:
                return rule
        return None


def _antecedent_sort_key(antecedent: tuple[str, str, str]) -> tuple[int, int, int]:
    return tuple(
        FUZZY_SETS[feat].index(name) for feat, name in zip(RULE_FEATURES, antecedent)
    )


def extract_rules(
    rows, labels, memberships: dict[str, MembershipFunction] | None = None
) -> RuleBase:
    """One rule per distinct fuzzified antecedent seen in training.

    Rows sharing an antecedent merge; conflicting consequents resolve by
    majority with ties going to Low (the conservative call). Support counts
    every row that produced the antecedent. The rule order is canonical (set
    indices), so the result is independent of row order.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    labels = list(labels)
    if rows.shape[0] == 0:
        raise EmptyTraining("no training rows")
    votes: dict[tuple[str, str, str], dict[str, int]] = {}
    for row, label in zip(rows, labels):
        if label not in (LOW, NOT_LOW):
            raise OutOfRange(f"label {label!r} must be {LOW} or {NOT_LOW}")
        ant = fuzzify(row, memberships)
        votes.setdefault(ant, {LOW: 0, NOT_LOW: 0})[label] += 1
    rules = []
    for ant in sorted(votes, key=_antecedent_sort_key):
        counts = votes[ant]
        consequent = NOT_LOW if counts[NOT_LOW] > counts[LOW] else LOW
        rules.append(FuzzyRule(ant, consequent, support=counts[LOW] + counts[NOT_LOW]))
    return RuleBase(rules)


def infer(
    rule_base: RuleBase, values, memberships: dict[str, MembershipFunction] | None = None
) -> float:
    """Fuzzy activation in [0, 1] for the given feature triple.

    An exact antecedent match returns the rule's crisp consequent (1.0 for
    NotLow, 0.0 for Low). Otherwise every rule is scored by the product of
    its antecedent sets' membership degrees at the input and the best rule
    (ties to the lowest index) supplies the consequent.
    """
    if not rule_base.rules:
        raise EmptyRuleBase("rule base has no rules")
    mfs = memberships or _DEFAULT_MF
    antecedent = fuzzify(values, mfs)
    rule = rule_base.lookup(antecedent)
    if rule is None:
        best_score = -1.0
        rule = rule_base.rules[0]
        for candidate in rule_base.rules:
            score = 1.0
            for feat, value, set_name in zip(RULE_FEATURES, values, candidate.antecedent):
                mf = mfs[feat]
                score *= mf.degrees(value)[mf.set_names.index(set_name)]
            if score > best_score:
                best_score = score
                rule = candidate
    return 1.0 if rule.consequent == NOT_LOW else 0.0


def defuzzify(activation: float) -> str:
    """Crisp class for an activation; 0.5 and above reads as NotLow."""
    if not 0.0 <= activation <= 1.0:
        raise OutOfRange(f"activation {activation} outside [0, 1]")
    return NOT_LOW if activation >= 0.5 else LOW


def classify(
    rule_base: RuleBase, values, memberships: dict[str, MembershipFunction] | None = None
) -> str:
    return defuzzify(infer(rule_base, values, memberships))


def merge_rule_bases(rule_bases: list[RuleBase]) -> RuleBase:
    """Union of unique (antecedent, consequent) pairs across folds.

    When folds disagree on an antecedent's consequent, the side with the
    larger total support wins; ties go to Low. The surviving rule carries the
    winning side's total support.
    """
    totals: dict[tuple[str, str, str], dict[str, int]] = {}
    for rb in rule_bases:
        for rule in rb.rules:
            bucket = totals.setdefault(rule.antecedent, {LOW: 0, NOT_LOW: 0})
            bucket[rule.consequent] += rule.support
    rules = []
    for ant in sorted(totals, key=_antecedent_sort_key):
        counts = totals[ant]
        consequent = NOT_LOW if counts[NOT_LOW] > counts[LOW] else LOW
        rules.append(FuzzyRule(ant, consequent, support=counts[consequent]))
    return RuleBase(rules)


def evaluate_fexai(
    rows,
    labels,
    k: int = 5,
    seed: int = 0,
    memberships: dict[str, MembershipFunction] | None = None,
) -> tuple[CvReport, RuleBase]:
    """Cross-validated rule extraction and scoring on Low vs NotLow labels.

    Per fold, rules come from the training split and the four metrics from
    the test split (NotLow is the positive class). The returned rule base is
    the across-fold union with support-weighted conflict resolution.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    labels = list(labels)
    scenario = SCENARIOS["low_vs_notlow"]
    folds = stratified_kfold(labels, k=k, seed=seed)
    fold_metrics: list[Metrics] = []
    fold_bases: list[RuleBase] = []
    for test_idx in folds:
        train_mask = np.ones(len(rows), dtype=bool)
        train_mask[test_idx] = False
        train_idx = np.flatnonzero(train_mask)
        rb = extract_rules(rows[train_idx], [labels[i] for i in train_idx], memberships)
        preds = [classify(rb, rows[i], memberships) for i in test_idx]
        truth = [labels[i] for i in test_idx]
        fold_metrics.append(evaluate(preds, truth, scenario))
        fold_bases.append(rb)
    return CvReport.from_folds(fold_metrics), merge_rule_bases(fold_bases)


# ---------------------------------------------------------------------------
# Rule text format
# ---------------------------------------------------------------------------

_RULE_RE = re.compile(
    r"^IF MDRate IS (?P<mdr>\w+) "
    r"AND FltSegments IS (?P<fs>\w+) "
    r"AND MDirection IS (?P<md>\w+) "
    r"THEN CDOCAT IS (?P<cat>Low|Not Low)"
    r"(?: # support=(?P<support>\d+))?$"
)


def format_rule(rule: FuzzyRule, with_support: bool = True) -> str:
    mdr, fs, md = rule.antecedent
    text = (
        f"IF MDRate IS {mdr} AND FltSegments IS {fs} AND MDirection IS {md} "
        f"THEN CDOCAT IS {CONSEQUENT_LABELS[rule.consequent]}"
    )
    if with_support:
        text += f" # support={rule.support}"
    return text


def parse_rule(line: str, lineno: int = 0) -> FuzzyRule:
    match = _RULE_RE.match(line.strip())
    if not match:
        raise RuleParseError(f"line {lineno}: not a valid rule: {line.strip()!r}")
    antecedent = (match["mdr"], match["fs"], match["md"])
    for feat, name in zip(RULE_FEATURES, antecedent):
        if name not in FUZZY_SETS[feat]:
            raise RuleParseError(
                f"line {lineno}: {name!r} is not a {RULE_FEATURE_LABELS[feat]} set"
            )
    support = int(match["support"]) if match["support"] else 1
    return FuzzyRule(antecedent, _CONSEQUENT_FROM_LABEL[match["cat"]], support)


def format_rule_base(rule_base: RuleBase, with_support: bool = True) -> str:
    return "".join(format_rule(r, with_support) + "\n" for r in rule_base.rules)


def parse_rule_base(text: str) -> RuleBase:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rules.append(parse_rule(line, lineno))
    return RuleBase(rules)


def write_rule_base(rule_base: RuleBase, path, with_support: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_rule_base(rule_base, with_support))


def read_rule_base(path) -> RuleBase:
    with open(path, encoding="utf-8") as fh:
        return parse_rule_base(fh.read())


# A known-good 14-rule base used by demos, closed-loop tests, and the
# synthetic generator's rule mode.
REFERENCE_RULE_TEXT = """\
IF MDRate IS Low AND FltSegments IS Moderate AND MDirection IS Straight THEN CDOCAT IS Low
IF MDRate IS Low AND FltSegments IS Few AND MDirection IS Straight THEN CDOCAT IS Low
IF MDRate IS Low AND FltSegments IS Many AND MDirection IS Straight THEN CDOCAT IS Low
IF MDRate IS Medium AND FltSegments IS Few AND MDirection IS Moderate THEN CDOCAT IS Not Low
IF MDRate IS Medium AND FltSegments IS Few AND MDirection IS Complex THEN CDOCAT IS Not Low
IF MDRate IS Medium AND FltSegments IS Few AND MDirection IS Straight THEN CDOCAT IS Not Low
IF MDRate IS High AND FltSegments IS Few AND MDirection IS Moderate THEN CDOCAT IS Not Low
IF MDRate IS High AND FltSegments IS Few AND MDirection IS Straight THEN CDOCAT IS Not Low
IF MDRate IS High AND FltSegments IS Few AND MDirection IS Complex THEN CDOCAT IS Not Low
IF MDRate IS Low AND FltSegments IS Few AND MDirection IS Moderate THEN CDOCAT IS Not Low
IF MDRate IS Low AND FltSegments IS Few AND MDirection IS Complex THEN CDOCAT IS Not Low
IF MDRate IS Low AND FltSegments IS Moderate AND MDirection IS Moderate THEN CDOCAT IS Low
IF MDRate IS Low AND FltSegments IS Many AND MDirection IS Complex THEN CDOCAT IS Low
IF MDRate IS Low AND FltSegments IS Moderate AND MDirection IS Complex THEN CDOCAT IS Low
"""


def reference_rules() -> RuleBase:
    """The shipped 14-rule reference base."""
    return parse_rule_base(REFERENCE_RULE_TEXT)
