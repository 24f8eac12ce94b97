from dataclasses import asdict, dataclass

from src.utils.error_handling import InvalidConfigError


@dataclass
class OptimizerConfig:
    """
    RMSProp settings.

    Attributes:
        learning_rate (float): Step size, 1e-5 by default.
        decay (float): Accumulator decay rho, in (0, 1).
        epsilon (float): Added to the root-mean-square before dividing.
    """

    learning_rate: float = 1e-5
    decay: float = 0.9
    epsilon: float = 1e-8

    def validate(self) -> "OptimizerConfig":
        # lr == 0 is accepted so that a frozen run can be expressed.
        if self.learning_rate < 0:
            raise InvalidConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0.0 < self.decay < 1.0:
            raise InvalidConfigError(f"decay must be in (0, 1), got {self.decay}")
        if self.epsilon <= 0:
            raise InvalidConfigError(f"epsilon must be positive, got {self.epsilon}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"Unknown OptimizerConfig keys: {sorted(unknown)}")
        return cls(**data).validate()
