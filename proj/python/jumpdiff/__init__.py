from ._jumpdiff import (
    CirJumpParams,
    ConfigError,
    DomainError,
    OracleUnavailable,
    ParameterError,
    RunConfig,
    entropy_l,
    load_config,
    parse_config,
    ratio_bounds,
    run_checks,
    simulate,
    verify,
)

__all__ = [
    "CirJumpParams",
    "ConfigError",
    "DomainError",
    "OracleUnavailable",
    "ParameterError",
    "RunConfig",
    "entropy_l",
    "load_config",
    "parse_config",
    "ratio_bounds",
    "run_checks",
    "simulate",
    "verify",
]
