"""Efficacy targets, thresholds and the four-group typology classifier.

Two one-sided tests drive the classification: an inferiority test against
the target efficacy and a non-inferiority test against the target minus
the margin.  The comparisons are exactly `lower CL >= adequacy threshold`
and `upper CL < inferiority threshold`; the fine-grained labels further
place the point estimate between the thresholds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError


class TypologyGroup(enum.IntEnum):
    REDUCED = 1
    INCONCLUSIVE = 2
    BORDERLINE = 3
    ADEQUATE = 4

    @property
    def label(self) -> str:
        return self.name.capitalize()


FINE_LABELS = ("1a", "1b", "1c", "2a", "2b", "2c", "3", "4a", "4b", "4c")


@dataclass(frozen=True)
class Typology:
    group: TypologyGroup
    fine: str | None = None

    def __post_init__(self) -> None:
        if self.fine is not None and self.fine not in FINE_LABELS:
            raise DomainError(f"unknown fine typology {self.fine!r}")


@dataclass(frozen=True)
class EfficacyDesign:
    """Target efficacy, non-inferiority margin and per-test significance level."""

    target: float
    margin: float = 0.05
    alpha: float = 0.025

    def __post_init__(self) -> None:
        if not (0.0 <= self.target <= 1.0):
            raise DomainError(f"target efficacy must lie in [0, 1], got {self.target}")
        if not (0.0 <= self.margin <= self.target):
            raise DomainError(
                f"margin must lie in [0, target], got {self.margin} with target {self.target}"
            )
        if not (0.0 < self.alpha < 0.5):
            raise DomainError(f"alpha must lie in (0, 0.5), got {self.alpha}")

    @property
    def threshold_inferiority(self) -> float:
        return self.target

    @property
    def threshold_adequacy(self) -> float:
        return self.target - self.margin

    @property
    def confidence_level(self) -> float:
        return 1.0 - 2.0 * self.alpha


def classify(reject_inferiority: bool, reject_noninferiority: bool) -> TypologyGroup:
    """Group from the two one-sided test results.

    Rejecting the inferiority null is evidence for reduced efficacy;
    rejecting the non-inferiority null is evidence for adequate efficacy.
    """
    if reject_inferiority and reject_noninferiority:
        return TypologyGroup.BORDERLINE
    if reject_inferiority:
        return TypologyGroup.REDUCED
    if reject_noninferiority:
        return TypologyGroup.ADEQUATE
    return TypologyGroup.INCONCLUSIVE


def _region(value: float, design: EfficacyDesign) -> int:
    # 0: below the adequacy threshold, 1: between thresholds, 2: at/above target
    if value < design.threshold_adequacy:
        return 0
    if value < design.threshold_inferiority:
        return 1
    return 2


def classify_fine(lcl: float, ucl: float, r_hat: float, design: EfficacyDesign) -> Typology:
    """Ten-way typology from interval endpoints plus the point estimate.

    The group depends only on the two binary threshold comparisons; the
    sub-label records where the interval endpoints and the point estimate
    sit relative to the two thresholds.
    """
    reject_inferiority = ucl < design.threshold_inferiority
    reject_noninferiority = lcl >= design.threshold_adequacy
    group = classify(reject_inferiority, reject_noninferiority)
    point = _region(r_hat, design)

    if group is TypologyGroup.REDUCED:
        if _region(ucl, design) == 0:
            fine = "1a"
        else:
            fine = "1b" if point == 0 else "1c"
    elif group is TypologyGroup.INCONCLUSIVE:
        fine = ("2a", "2b", "2c")[point]
    elif group is TypologyGroup.BORDERLINE:
        fine = "3"
    else:
        if _region(lcl, design) == 2:
            fine = "4c"
        else:
            fine = "4a" if point <= 1 else "4b"
    return Typology(group, fine)
