"""Model identity and physical parameters of a random flight."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

from randflight.errors import ConfigError


class Model(str, enum.Enum):
    """Flight families.

    X  -- Dirichlet(d-1) inter-change times, counts from the First law.
    Y  -- Dirichlet(d/2-1) inter-change times, counts from the Second law.
    U3 -- three-dimensional motion turning only at even-indexed events of a
          homogeneous Poisson process.
    """

    X = "x"
    Y = "y"
    U3 = "u3"


def check_model_dim(model: Model, d: int) -> None:
    model = Model(model)
    if model is Model.X and d < 2:
        raise ConfigError("First family requires dim ≥ 2")
    if model is Model.Y and d < 3:
        raise ConfigError("Second family requires dim ≥ 3")
    if model is Model.U3 and d != 3:
        raise ConfigError("U3 motion is defined only for dim = 3")


@dataclass(frozen=True)
class FlightParams:
    model: Model
    d: int
    c: float = 1.0
    lam: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if int(self.d) != self.d:
            raise ConfigError(f"dimension must be an integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        check_model_dim(self.model, self.d)
        for name in ("c", "lam", "t"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def ct(self) -> float:
        return self.c * self.t

    @property
    def lt(self) -> float:
        return self.lam * self.t

    def to_dict(self) -> dict:
        out = asdict(self)
        out["model"] = self.model.value
        return out
