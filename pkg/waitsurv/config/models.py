"""Configuration models for waitsurv.

Pydantic models defining the YAML configuration schema with validation rules.
All fields have defaults; empty YAML files are valid (use all defaults).

Key models:
- AppConfig: Top-level configuration container
- GeneralConfig: Seed, fold count, worker count, logging
- LinearConfig: VIF screening, Newton-Raphson and backward elimination settings
- ReliefConfig: RReliefF neighbourhood settings
- NetworkConfig / DeepModelConfig: Deep Cox network architecture and SGD settings
- SearchSpace: Random-search ranges and trial budget
- SyntheticSpec: Synthetic survival data generator (separate spec file)

Configuration precedence: CLI args > YAML > defaults
"""

from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from waitsurv.config.search_space import ChoiceParam, ParamSpec, RangeParam, parse_param


class GeneralConfig(BaseModel):
    """Run-wide settings.

    Attributes:
        seed: Master seed; every random stream is derived from it.
        folds: Number of cross-validation folds.
        jobs: Parallel workers for search trials.
        debug: Enable DEBUG logging.
        log_path: Log file path (None = <out_dir>/waitsurv.log).
    """

    seed: int = Field(default=42, ge=0)
    folds: int = Field(default=10, ge=2)
    jobs: int = Field(default=1, ge=1)
    debug: bool = False
    log_path: Optional[str] = None

    @field_validator("log_path")
    @classmethod
    def normalize_log_path(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return None
        cleaned = str(v).strip()
        return cleaned or None


class DescribeConfig(BaseModel):
    """Descriptive statistics settings.

    Attributes:
        bin_width: Histogram bin width in seconds.
        max_numeric_levels: Numeric columns with at most this many distinct values
            are summarized per value, like categorical levels.
    """

    bin_width: float = Field(default=1.0, gt=0)
    max_numeric_levels: int = Field(default=10, ge=0)


class LinearConfig(BaseModel):
    """Linear Cox model workflow: VIF screen, Newton-Raphson fit, backward elimination."""

    vif_screen: bool = True
    vif_threshold: float = Field(default=5.0, ge=1.0)
    alpha: float = Field(default=0.05, gt=0.0, le=1.0)
    backward: bool = True
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_iterations: int = Field(default=100, ge=1)
    ridge: Optional[float] = Field(default=None, ge=0.0)


class ReliefConfig(BaseModel):
    """RReliefF settings.

    Attributes:
        k_neighbors: Nearest neighbours per sampled instance.
        m_samples: Instances to sample (None = every instance, in order).
        sigma: Width of the exp(-(rank/sigma)^2) neighbour influence.
        seed: Seed for instance sampling (ignored when m_samples is None).
        per_fold: Average rankings over cross-validation training splits.
    """

    k_neighbors: int = Field(default=10, ge=1)
    m_samples: Optional[int] = Field(default=None, ge=1)
    sigma: float = Field(default=20.0, gt=0.0)
    seed: int = Field(default=0, ge=0)
    per_fold: bool = True


class NetworkConfig(BaseModel):
    """Deep Cox network architecture and optimizer settings.

    Attributes:
        n_inputs: Input width (top-n selected features); set by the pipeline.
        hidden_layers: Width of each fully connected hidden layer.
        dropout_rate: Drop probability after every hidden layer.
        batch_norm: Normalize hidden pre-activations.
        l2_coefficient: Weight decay on weight matrices.
        learning_rate: Initial SGD step size.
        lr_decay: Exponential decay, lr_t = lr_0 * exp(-lr_decay * epoch).
        momentum: Classical momentum coefficient.
        epochs: Full-batch training epochs.
        seed: Seed for initialization and dropout masks.
    """

    n_inputs: Optional[int] = Field(default=None, ge=1)
    hidden_layers: List[int] = Field(default_factory=lambda: [32, 32], min_length=1)
    dropout_rate: float = Field(default=0.1, ge=0.0, lt=1.0)
    batch_norm: bool = False
    l2_coefficient: float = Field(default=1e-4, ge=0.0)
    learning_rate: float = Field(default=1e-4, gt=0.0)
    lr_decay: float = Field(default=1e-3, ge=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    epochs: int = Field(default=500, ge=1)
    seed: int = Field(default=0, ge=0)

    @field_validator("hidden_layers")
    @classmethod
    def validate_widths(cls, v: List[int]) -> List[int]:
        if any(width < 1 for width in v):
            raise ValueError("hidden layer widths must be >= 1")
        return v

    @property
    def layer_sizes(self) -> List[int]:
        if self.n_inputs is None:
            raise ValueError("n_inputs must be set before building a network")
        return [self.n_inputs, *self.hidden_layers, 1]


class DeepModelConfig(BaseModel):
    """Network settings plus the feature-selection step in front of it.

    Attributes:
        network: Architecture and optimizer.
        n_features: Keep the top-n RReliefF features (None = all features).
        inner_validation: Fraction of each training split held out to pick the
            best epoch by C-index (0 = keep final parameters).
    """

    network: NetworkConfig = Field(default_factory=NetworkConfig)
    n_features: Optional[int] = Field(default=None, ge=1)
    inner_validation: float = Field(default=0.0, ge=0.0, lt=0.5)


def _default_param(raw: Any):
    return lambda: parse_param(raw)


class SearchSpace(BaseModel):
    """Random-search ranges over DeepModelConfig fields.

    Every field accepts a choice list, "min..max", "min..max log" or
    "min..max int" (see `waitsurv.config.search_space`). All hidden layers of a
    sampled network share one width.
    """

    model_config = ConfigDict(extra="forbid")

    budget: int = Field(default=100, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    n_features: ParamSpec = Field(default_factory=_default_param("2..20 int"))
    n_layers: ParamSpec = Field(default_factory=_default_param([1, 2, 3]))
    layer_width: ParamSpec = Field(default_factory=_default_param([25, 50, 75]))
    dropout_rate: ParamSpec = Field(default_factory=_default_param("0.0..0.5"))
    batch_norm: ParamSpec = Field(default_factory=_default_param([False, True]))
    l2_coefficient: ParamSpec = Field(default_factory=_default_param("1e-5..1e-1 log"))
    learning_rate: ParamSpec = Field(default_factory=_default_param("1e-5..1e-3 log"))
    lr_decay: ParamSpec = Field(default_factory=_default_param("0.0..0.005"))
    momentum: ParamSpec = Field(default_factory=_default_param("0.8..0.95"))
    epochs: ParamSpec = Field(default_factory=_default_param([200]))
    inner_validation: float = Field(default=0.0, ge=0.0, lt=0.5)

    @field_validator(
        "n_features",
        "n_layers",
        "layer_width",
        "dropout_rate",
        "batch_norm",
        "l2_coefficient",
        "learning_rate",
        "lr_decay",
        "momentum",
        "epochs",
        mode="before",
    )
    @classmethod
    def parse_ranges(cls, v: Any) -> ParamSpec:
        return parse_param(v)


class RiskFunctionSpec(BaseModel):
    """True log-risk used by the synthetic generator.

    kind:
        linear: h = X @ coefficients.
        quadratic_interaction: h = scale * x1 * x2 (scale = coefficients[0], default 1).
        expression: pandas expression over columns x1..xp, e.g. "x1 * x2 + 0.5 * x3".
    """

    kind: Literal["linear", "quadratic_interaction", "expression"] = "linear"
    coefficients: List[float] = Field(default_factory=list)
    expression: Optional[str] = None


class BaselineSpec(BaseModel):
    """Baseline hazard: exponential(rate) or Weibull(shape, scale)."""

    kind: Literal["exponential", "weibull"] = "exponential"
    rate: float = Field(default=0.1, gt=0.0)
    shape: float = Field(default=1.5, gt=0.0)
    scale: float = Field(default=10.0, gt=0.0)


class SyntheticSpec(BaseModel):
    n_samples: int = Field(default=2000, ge=2)
    n_features: int = Field(default=2, ge=1)
    risk: RiskFunctionSpec = Field(default_factory=RiskFunctionSpec)
    baseline: BaselineSpec = Field(default_factory=BaselineSpec)
    censoring_rate: float = Field(default=0.2, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_risk(self):
        if self.risk.kind == "linear":
            if not self.risk.coefficients:
                self.risk.coefficients = [0.0] * self.n_features
            if len(self.risk.coefficients) != self.n_features:
                raise ValueError(
                    f"linear risk needs {self.n_features} coefficients, "
                    f"got {len(self.risk.coefficients)}"
                )
        elif self.risk.kind == "quadratic_interaction" and self.n_features < 2:
            raise ValueError("quadratic_interaction risk needs at least two features")
        elif self.risk.kind == "expression" and not (self.risk.expression or "").strip():
            raise ValueError("expression risk needs a non-empty expression")
        return self


class AppConfig(BaseModel):
    """Top-level waitsurv configuration.

    Attributes:
        general: Seed, folds, jobs, logging.
        describe: Descriptive statistics.
        linear: Linear Cox workflow.
        relief: RReliefF ranking.
        deep: Deep Cox model used by `compare` and as the search fallback.
        search: Random-search space.
    """

    general: GeneralConfig = Field(default_factory=GeneralConfig)
    describe: DescribeConfig = Field(default_factory=DescribeConfig)
    linear: LinearConfig = Field(default_factory=LinearConfig)
    relief: ReliefConfig = Field(default_factory=ReliefConfig)
    deep: DeepModelConfig = Field(default_factory=DeepModelConfig)
    search: SearchSpace = Field(default_factory=SearchSpace)


__all__ = [
    "AppConfig",
    "BaselineSpec",
    "ChoiceParam",
    "DeepModelConfig",
    "DescribeConfig",
    "GeneralConfig",
    "LinearConfig",
    "NetworkConfig",
    "RangeParam",
    "ReliefConfig",
    "RiskFunctionSpec",
    "SearchSpace",
    "SyntheticSpec",
]
