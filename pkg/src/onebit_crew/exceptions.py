"""Exception hierarchy shared by all modules."""

import numpy as np


class CrewError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CrewError, ValueError):
    """An input lies outside the domain of an operation."""


class DegenerateFilterError(CrewError, ValueError):
    """The filter/waveform pair gives a (numerically) zero output power."""


class ConditioningError(CrewError, np.linalg.LinAlgError):
    """A covariance is singular even after diagonal loading."""


class ConfigError(CrewError, ValueError):
    """Invalid scenario or sweep configuration."""


class EstimationError(CrewError, ValueError):
    """Sample statistics are inconsistent with the assumed model."""


class ConsistencyError(CrewError, RuntimeError):
    """Two independent computations of the same quantity disagree."""
