"""Error taxonomy shared across the package.

Two failure families matter to callers: bad inputs (configuration or
precondition violations, CLI exit code 2) and broken numerical contracts
(unitarity, positivity, solver failures; CLI exit code 3).
"""


class ConfigError(ValueError):
    """Invalid configuration value or violated operation precondition."""


class GridMismatchError(ConfigError):
    """Operands live on different grids or in incompatible mode orderings."""


class ContractViolationError(RuntimeError):
    """A numerical guarantee (unitarity, positivity, norm drift) was broken."""


class EigensolverError(ContractViolationError):
    """Dense eigensolver failed to converge; carries the operator context."""
