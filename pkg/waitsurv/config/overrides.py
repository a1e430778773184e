from dataclasses import dataclass
from typing import Optional

from waitsurv.config.models import AppConfig


@dataclass(frozen=True)
class CliConfigOverrides:
    """Command-line values that win over the config file.

    `None` (or False for switches) means "not given on the command line".
    """

    seed: Optional[int] = None
    folds: Optional[int] = None
    jobs: Optional[int] = None
    log_path: Optional[str] = None
    debug: bool = False
    bin_width: Optional[float] = None
    vif_threshold: Optional[float] = None
    alpha: Optional[float] = None
    tolerance: Optional[float] = None
    ridge: Optional[float] = None
    k_neighbors: Optional[int] = None
    m_samples: Optional[int] = None
    sigma: Optional[float] = None
    full_data: bool = False
    budget: Optional[int] = None
    n_features: Optional[int] = None
    epochs: Optional[int] = None

    @property
    def has_overrides(self) -> bool:
        return any(
            value is not None
            for value in (
                self.seed,
                self.folds,
                self.jobs,
                self.log_path,
                self.bin_width,
                self.vif_threshold,
                self.alpha,
                self.tolerance,
                self.ridge,
                self.k_neighbors,
                self.m_samples,
                self.sigma,
                self.budget,
                self.n_features,
                self.epochs,
            )
        ) or any((self.debug, self.full_data))

    def apply(self, config: AppConfig) -> AppConfig:
        """Apply overrides and re-validate, so bad flag values fail like bad YAML."""
        data = config.model_dump()
        general, linear, relief = data["general"], data["linear"], data["relief"]
        if self.seed is not None:
            general["seed"] = self.seed
        if self.folds is not None:
            general["folds"] = self.folds
        if self.jobs is not None:
            general["jobs"] = self.jobs
        if self.log_path is not None:
            general["log_path"] = str(self.log_path)
        if self.debug:
            general["debug"] = True
        if self.bin_width is not None:
            data["describe"]["bin_width"] = self.bin_width
        if self.vif_threshold is not None:
            linear["vif_threshold"] = self.vif_threshold
        if self.alpha is not None:
            linear["alpha"] = self.alpha
        if self.tolerance is not None:
            linear["tolerance"] = self.tolerance
        if self.ridge is not None:
            linear["ridge"] = self.ridge
        if self.k_neighbors is not None:
            relief["k_neighbors"] = self.k_neighbors
        if self.m_samples is not None:
            relief["m_samples"] = self.m_samples
        if self.sigma is not None:
            relief["sigma"] = self.sigma
        if self.full_data:
            relief["per_fold"] = False
        if self.budget is not None:
            data["search"]["budget"] = self.budget
        if self.n_features is not None:
            data["deep"]["n_features"] = self.n_features
        if self.epochs is not None:
            data["deep"]["network"]["epochs"] = self.epochs
        return AppConfig.model_validate(data)
