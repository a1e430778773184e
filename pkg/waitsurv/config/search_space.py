"""Parsing and sampling of hyperparameter search ranges.

A search-space entry is one of:
- a choice list (YAML list) or a single scalar (one-element choice),
- a range string "min..max" (uniform),
- "min..max log" (log-uniform, both bounds > 0),
- "min..max int" (uniform integer, bounds inclusive).
"""

from __future__ import annotations

import math
import re
from typing import Any, List, Literal, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RANGE_PATTERN = re.compile(
    rf"^(?P<low>{_NUMBER})\s*\.\.\s*(?P<high>{_NUMBER})(?P<flags>(?:\s+(?:log|int))*)$"
)


class ChoiceParam(BaseModel):
    kind: Literal["choice"] = "choice"
    values: List[Any] = Field(min_length=1)

    def sample(self, rng: np.random.Generator) -> Any:
        return self.values[int(rng.integers(len(self.values)))]

    def describe(self) -> str:
        return "[" + ", ".join(str(v) for v in self.values) + "]"


class RangeParam(BaseModel):
    kind: Literal["range"] = "range"
    low: float
    high: float
    log: bool = False
    integer: bool = False

    @model_validator(mode="after")
    def validate_bounds(self):
        if self.low > self.high:
            raise ValueError(f"range low {self.low} exceeds high {self.high}")
        if self.log and self.low <= 0:
            raise ValueError("log ranges need strictly positive bounds")
        if self.integer and (self.low != int(self.low) or self.high != int(self.high)):
            raise ValueError("integer ranges need integral bounds")
        return self

    def sample(self, rng: np.random.Generator) -> float | int:
        if self.integer:
            if self.log:
                value = math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
                return int(min(max(round(value), self.low), self.high))
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.log:
            return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))
        return float(rng.uniform(self.low, self.high))

    def describe(self) -> str:
        flags = "".join(f" {flag}" for flag, on in (("log", self.log), ("int", self.integer)) if on)
        return f"{self.low:g}..{self.high:g}{flags}"


ParamSpec = Union[ChoiceParam, RangeParam]


def parse_param(raw: Any) -> ParamSpec:
    """Turn a raw YAML value into a ParamSpec.

    Raises:
        ValueError: If a string is neither a valid range nor usable as a choice.
    """
    if isinstance(raw, (ChoiceParam, RangeParam)):
        return raw
    if isinstance(raw, dict):
        kind = raw.get("kind")
        if kind == "choice":
            return ChoiceParam.model_validate(raw)
        if kind == "range":
            return RangeParam.model_validate(raw)
        raise ValueError(f"Unknown parameter kind in {raw!r}")
    if isinstance(raw, (list, tuple)):
        return ChoiceParam(values=list(raw))
    if isinstance(raw, str):
        text = raw.strip()
        match = _RANGE_PATTERN.fullmatch(text)
        if match is None:
            if ".." in text:
                raise ValueError(
                    f"Invalid range '{raw}'. Use 'min..max', 'min..max log' or 'min..max int'."
                )
            return ChoiceParam(values=[text])
        flags = set(match.group("flags").split())
        return RangeParam(
            low=float(match.group("low")),
            high=float(match.group("high")),
            log="log" in flags,
            integer="int" in flags,
        )
    return ChoiceParam(values=[raw])
