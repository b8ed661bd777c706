from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class TrainingConfig:
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_leaves: int = 31
    min_samples_leaf: int = 20
    l2_reg: float = 1.0            # lambda in the leaf penalty
    min_split_gain: float = 0.0    # gamma, charged per split
    max_bins: int = 255
    goss_top_rate: float = 0.2
    goss_other_rate: float = 0.1
    enable_efb: bool = True
    efb_conflict_threshold: float = 0.0
    threshold: float = 0.5         # on predicted probability
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_leaves < 1:
            raise ValueError("max_leaves must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.l2_reg < 0 or self.min_split_gain < 0:
            raise ValueError("l2_reg and min_split_gain must be >= 0")
        if not 2 <= self.max_bins <= 255:
            raise ValueError("max_bins must be in [2, 255]")
        for name in ("goss_top_rate", "goss_other_rate", "efb_conflict_threshold", "threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.goss_top_rate + self.goss_other_rate > 1.0 + 1e-12:
            raise ValueError("goss_top_rate + goss_other_rate must be <= 1")
        if self.goss_top_rate + self.goss_other_rate == 0:
            raise ValueError("GOSS would select no samples")

    @property
    def uses_goss(self) -> bool:
        return self.goss_top_rate < 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "TrainingConfig":
        """Build from string or typed values; unknown keys raise."""
        kinds = {f.name: f.type for f in fields(cls)}
        parsed = {}
        for key, value in values.items():
            if key not in kinds:
                raise KeyError(f"unknown training option {key!r}")
            kind = kinds[key]
            if isinstance(value, str):
                if kind == "bool":
                    value = value.strip().lower() in ("1", "true", "yes", "on")
                elif kind == "int":
                    value = int(value)
                else:
                    value = float(value)
            parsed[key] = value
        return cls(**parsed)
