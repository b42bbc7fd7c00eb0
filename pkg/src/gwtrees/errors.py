"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary argument and domain problems;
the classes here mark conditions a caller may want to budget around
(resource caps, iteration limits) or parameter regimes where a requested
quantity is undefined.
"""


class ResourceLimitError(RuntimeError):
    """An enumeration or sampling request exceeded its configured budget."""


class ConvergenceError(RuntimeError):
    """An iterative computation failed to reach tolerance within its budget."""


class ModelError(ValueError):
    """Parameters lie outside the regime where the requested quantity exists."""
