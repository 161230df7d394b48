"""Python front end for the pointsim simulator."""

from ._pointsim import (
    CapacityError,
    ConfigError,
    Fid,
    assign_link_ids,
    compare,
    encode,
    false_positive_rate,
    run,
    should_forward,
    validate,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "Fid",
    "assign_link_ids",
    "compare",
    "encode",
    "false_positive_rate",
    "run",
    "should_forward",
    "validate",
]
