"""Experiment identifiers and the shared token grammar for metric values.

An experiment id renders as ``E`` followed by the number zero-padded to
at least three digits (E001, E042, E1000). Rendered ids of equal width
sort the same way as their numbers, which keeps git log output and
report sections in experiment order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ValidationError

# metric names: leading letter or underscore, then letters/digits/_/.
METRIC_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
# decimal numbers: optional sign, digits, optional fraction, optional exponent
NUMBER_RE = re.compile(r"-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?")

_ID_RE = re.compile(r"^E([0-9]{3,})$")


@dataclass(frozen=True, order=True)
class ExperimentId:
    number: int

    def __post_init__(self):
        if self.number < 1:
            raise ValidationError(f"experiment number must be positive, got {self.number}")

    def render(self) -> str:
        return f"E{self.number:03d}"

    def __str__(self) -> str:
        return self.render()


def parse_experiment_id(text: str) -> ExperimentId:
    m = _ID_RE.match(text)
    if not m or int(m.group(1)) < 1:
        raise ValidationError(f"malformed experiment id {text!r}")
    return ExperimentId(int(m.group(1)))


def render_metric_value(value: float) -> str:
    """Shortest decimal form that parses back to the same float."""
    if value != value or value in (float("inf"), float("-inf")):
        raise ValidationError(f"metric value must be finite, got {value!r}")
    return repr(float(value))
