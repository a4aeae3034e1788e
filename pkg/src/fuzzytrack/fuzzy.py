"""Singleton-consequent fuzzy controller for heading correction.

Two inputs, heading error and linear speed, are fuzzified with triangular
membership functions, combined through a 9x5 rule table with min (AND) and
max (aggregation), and defuzzified as the strength-weighted average of the
crisp output values.

Sign convention: the "left deviation" error terms (SL, L, BL, VBL) sit on
the positive side of the error axis, and a positive output means "turn
right". :mod:`fuzzytrack.controller` negates the output into the world
frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

OUTPUT_LABELS = ("VBL", "BL", "L", "SL", "Z", "SR", "R", "BR", "VBR")
ERROR_LABELS = OUTPUT_LABELS
SPEED_LABELS = ("VS", "S", "M", "F", "VF")

# Error terms in increasing order along the error axis.
ERROR_AXIS_ORDER = ("VBR", "BR", "R", "SR", "Z", "SL", "L", "BL", "VBL")

DEFAULT_ERROR_PEAKS = (
    -math.pi,
    -math.pi / 2,
    -math.pi / 4,
    -math.pi / 12,
    0.0,
    math.pi / 12,
    math.pi / 4,
    math.pi / 2,
    math.pi,
)
DEFAULT_ERROR_UNIVERSE = (-math.pi, math.pi)
DEFAULT_SPEED_PEAKS = (0.1, 0.3, 0.6, 0.9, 1.2)
DEFAULT_SPEED_UNIVERSE = (0.0, 1.5)

DEFAULT_OUTPUTS = {
    "VBL": -5.0,
    "BL": -3.0,
    "L": -1.75,
    "SL": -0.5,
    "Z": 0.0,
    "SR": 0.5,
    "R": 1.75,
    "BR": 3.0,
    "VBR": 5.0,
}

# Rows: heading error VBL..VBR; columns: speed VS..VF.
PAPER_RULES = (
    ("BR", "VBR", "VBR", "VBR", "VBL"),
    ("BR", "BR", "VBR", "VBR", "VBR"),
    ("R", "R", "BR", "BR", "BR"),
    ("SR", "SR", "R", "R", "R"),
    ("Z", "Z", "Z", "Z", "Z"),
    ("SL", "SL", "L", "L", "L"),
    ("L", "L", "BL", "BL", "BL"),
    ("BL", "BL", "VBL", "VBL", "VBL"),
    ("BL", "VBL", "VBL", "VBL", "VBL"),
)
# Same table with (VBL, VF) mirrored from (VBR, VF), restoring antisymmetry.
CORRECTED_RULES = (("BR", "VBR", "VBR", "VBR", "VBR"),) + PAPER_RULES[1:]


def mirror_label(label: str) -> str:
    """Swap the left/right sense of a label (``BL`` <-> ``BR``, ``Z`` fixed)."""
    if label == "Z":
        return label
    if label.endswith("L"):
        return label[:-1] + "R"
    if label.endswith("R"):
        return label[:-1] + "L"
    raise ValueError(f"not a directional label: {label!r}")


class DegenerateInputError(ValueError):
    """Raised when no rule fires, so defuzzification is undefined."""


@dataclass(frozen=True)
class TriangularMF:
    """Triangle on [left_foot, right_foot] peaking at ``peak``.

    A shoulder on a side keeps the membership at 1 beyond the peak on that
    side.
    """

    left_foot: float
    peak: float
    right_foot: float
    shoulder_left: bool = False
    shoulder_right: bool = False

    def __post_init__(self):
        if not self.left_foot <= self.peak <= self.right_foot:
            raise ValueError(
                f"need left_foot <= peak <= right_foot, got "
                f"({self.left_foot}, {self.peak}, {self.right_foot})"
            )

    def __call__(self, x: float) -> float:
        if x == self.peak:
            return 1.0
        if x < self.peak:
            if self.shoulder_left:
                return 1.0
            if x <= self.left_foot:
                return 0.0
            return (x - self.left_foot) / (self.peak - self.left_foot)
        if self.shoulder_right:
            return 1.0
        if x >= self.right_foot:
            return 0.0
        return (self.right_foot - x) / (self.right_foot - self.peak)


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    universe: tuple[float, float]
    terms: tuple[tuple[str, TriangularMF], ...]

    def __post_init__(self):
        lo, hi = self.universe
        if not lo < hi:
            raise ValueError(f"{self.name}: empty universe {self.universe}")
        labels = [label for label, _ in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"{self.name}: duplicate term labels {labels}")
        if not self.terms:
            raise ValueError(f"{self.name}: no terms")
        mfs = [mf for _, mf in self.terms]
        for a, b in zip(mfs, mfs[1:]):
            if not a.peak < b.peak:
                raise ValueError(f"{self.name}: term peaks must be strictly increasing")
            # Adjacent supports must overlap, otherwise a gap has zero membership.
            if not (b.left_foot < a.right_foot or a.shoulder_right or b.shoulder_left):
                raise ValueError(f"{self.name}: gap between terms at {a.right_foot}")
        if not (mfs[0].shoulder_left or mfs[0].peak <= lo):
            raise ValueError(f"{self.name}: universe start {lo} is not covered")
        if not (mfs[-1].shoulder_right or mfs[-1].peak >= hi):
            raise ValueError(f"{self.name}: universe end {hi} is not covered")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.terms)

    def clamp(self, x: float) -> float:
        lo, hi = self.universe
        return min(max(x, lo), hi)


def ruler_partition(
    name: str,
    universe: tuple[float, float],
    labels: Sequence[str],
    peaks: Sequence[float],
) -> LinguisticVariable:
    """Build a variable whose triangles have their feet on the neighbouring peaks.

    The outermost terms get shoulders, so the partition sums to one
    everywhere in the universe.
    """
    if len(labels) != len(peaks):
        raise ValueError(f"{name}: {len(labels)} labels but {len(peaks)} peaks")
    if len(peaks) < 2:
        raise ValueError(f"{name}: need at least two terms")
    terms = []
    n = len(peaks)
    for i, (label, peak) in enumerate(zip(labels, peaks)):
        left = peaks[i - 1] if i > 0 else peak
        right = peaks[i + 1] if i < n - 1 else peak
        mf = TriangularMF(left, peak, right, shoulder_left=i == 0, shoulder_right=i == n - 1)
        terms.append((label, mf))
    return LinguisticVariable(name, (float(universe[0]), float(universe[1])), tuple(terms))


@dataclass(frozen=True)
class RuleTable:
    """Output label for every (error term, speed term) pair."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.cells) != len(self.rows) or any(len(r) != len(self.cols) for r in self.cells):
            shape = [len(r) for r in self.cells]
            raise ValueError(
                f"rule table must be {len(self.rows)}x{len(self.cols)}, got row lengths {shape}"
            )
        for row in self.cells:
            for cell in row:
                if cell not in OUTPUT_LABELS:
                    raise ValueError(f"rule table: unknown output label {cell!r}")

    def __getitem__(self, key: tuple[str, str]) -> str:
        e, s = key
        return self.cells[self.rows.index(e)][self.cols.index(s)]

    def is_antisymmetric(self) -> bool:
        return all(
            self[mirror_label(e), s] == mirror_label(self[e, s])
            for e in self.rows
            for s in self.cols
        )

    @classmethod
    def from_grid(cls, grid: Sequence[Sequence[str]]) -> "RuleTable":
        return cls(ERROR_LABELS, SPEED_LABELS, tuple(tuple(row) for row in grid))


def validate_outputs(outputs: Mapping[str, float]) -> dict[str, float]:
    """Check the output singletons: all nine labels, increasing, odd, Z = 0."""
    if set(outputs) != set(OUTPUT_LABELS):
        raise ValueError(f"outputs must have exactly the labels {OUTPUT_LABELS}")
    values = [float(outputs[k]) for k in OUTPUT_LABELS]
    if any(not math.isfinite(v) for v in values):
        raise ValueError("outputs must be finite")
    if any(a >= b for a, b in zip(values, values[1:])):
        raise ValueError("outputs must be strictly increasing from VBL to VBR")
    if values[4] != 0.0:
        raise ValueError("output Z must be 0")
    for label in OUTPUT_LABELS:
        if outputs[label] != -outputs[mirror_label(label)]:
            raise ValueError(f"outputs must be antisymmetric ({label} vs {mirror_label(label)})")
    return dict(zip(OUTPUT_LABELS, values))


def fuzzify(var: LinguisticVariable, x: float) -> dict[str, float]:
    """Membership degree of every term of ``var`` at ``x`` (clamped to the universe)."""
    x = var.clamp(x)
    return {label: mf(x) for label, mf in var.terms}


def infer(
    c: "FuzzyController",
    e_degrees: Mapping[str, float],
    s_degrees: Mapping[str, float],
) -> dict[str, float]:
    """Fire the rule table: min for AND, max across rules sharing an output.

    Only labels with positive strength are returned, in output-label order.
    """
    fired: dict[str, float] = {}
    active_s = [(s, d) for s, d in s_degrees.items() if d > 0.0]
    for e, de in e_degrees.items():
        if de <= 0.0:
            continue
        for s, ds in active_s:
            label = c.rules[e, s]
            strength = de if de < ds else ds
            if strength > fired.get(label, 0.0):
                fired[label] = strength
    return {label: fired[label] for label in OUTPUT_LABELS if label in fired}


def defuzzify(strengths: Mapping[str, float], outputs: Mapping[str, float]) -> float:
    """Strength-weighted average of the output singletons.

    ``math.fsum`` makes the sums independent of term order, which keeps the
    controller exactly odd-symmetric. The result is clamped to the range of
    the fired singletons, which rounding in the division can overshoot by
    an ulp.
    """
    total = math.fsum(strengths.values())
    if not total > 0.0:
        raise DegenerateInputError("no rule fired")
    value = math.fsum(w * outputs[label] for label, w in strengths.items()) / total
    fired = [outputs[label] for label, w in strengths.items() if w > 0.0]
    return min(max(value, min(fired)), max(fired))


@dataclass(frozen=True)
class FuzzyController:
    error_var: LinguisticVariable
    speed_var: LinguisticVariable
    rules: RuleTable
    outputs: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_OUTPUTS))

    def __post_init__(self):
        if set(self.rules.rows) != set(self.error_var.labels):
            raise ValueError("rule rows do not match the heading-error terms")
        if set(self.rules.cols) != set(self.speed_var.labels):
            raise ValueError("rule columns do not match the speed terms")
        object.__setattr__(self, "outputs", validate_outputs(self.outputs))

    def evaluate(self, heading_error: float, speed: float) -> float:
        return evaluate(self, heading_error, speed)

    @property
    def output_bound(self) -> float:
        return max(abs(v) for v in self.outputs.values())


def evaluate(c: FuzzyController, heading_error: float, speed: float) -> float:
    """Crisp controller output (rad/s, right-turn positive) for one input pair."""
    fired = infer(c, fuzzify(c.error_var, heading_error), fuzzify(c.speed_var, speed))
    return defuzzify(fired, c.outputs)


def build_controller(
    *,
    paper_exact_rules: bool = False,
    rules: Sequence[Sequence[str]] | None = None,
    error_peaks: Sequence[float] = DEFAULT_ERROR_PEAKS,
    error_universe: tuple[float, float] = DEFAULT_ERROR_UNIVERSE,
    speed_peaks: Sequence[float] = DEFAULT_SPEED_PEAKS,
    speed_universe: tuple[float, float] = DEFAULT_SPEED_UNIVERSE,
    outputs: Mapping[str, float] = DEFAULT_OUTPUTS,
) -> FuzzyController:
    """Assemble a controller from peak lists and a rule grid.

    Args:
        paper_exact_rules: use the rule table verbatim, including the
            asymmetric (VBL, VF) cell, instead of the corrected table.
            Ignored when ``rules`` is given.
        rules: explicit 9x5 grid, rows VBL..VBR, columns VS..VF.
        error_peaks: nine increasing peaks in error-axis order
            (VBR, BR, R, SR, Z, SL, L, BL, VBL).
        speed_peaks: five increasing peaks for VS..VF.
    """
    if rules is None:
        rules = PAPER_RULES if paper_exact_rules else CORRECTED_RULES
    error_var = ruler_partition("heading_error", error_universe, ERROR_AXIS_ORDER, error_peaks)
    speed_var = ruler_partition("speed", speed_universe, SPEED_LABELS, speed_peaks)
    return FuzzyController(error_var, speed_var, RuleTable.from_grid(rules), dict(outputs))


def default_controller(paper_exact_rules: bool = False) -> FuzzyController:
    return build_controller(paper_exact_rules=paper_exact_rules)
