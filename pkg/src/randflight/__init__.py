"""Random flights with Dirichlet inter-change times: simulation, closed-form
laws and numerical certificates for the PDEs those laws satisfy."""

__version__ = "0.1.0"

from randflight.errors import ConfigError, DomainError, PoleError, SeriesError
from randflight.params import FlightParams, Model
from randflight.specfun import SeriesControl

__all__ = [
    "ConfigError",
    "DomainError",
    "FlightParams",
    "Model",
    "PoleError",
    "SeriesControl",
    "SeriesError",
    "__version__",
]
