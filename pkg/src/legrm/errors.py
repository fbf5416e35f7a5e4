"""Exception hierarchy shared by every module."""


class LegrmError(Exception):
    """Base class for all errors raised by legrm."""


class ScenarioParseError(LegrmError, ValueError):
    """The scenario document is not well-formed."""


class ScenarioValidationError(LegrmError, ValueError):
    """A scenario violates one or more invariants.

    ``violations`` holds every :class:`~legrm.scenario.Violation` found,
    not just the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.path}: {v.rule}" for v in self.violations)
        super().__init__(f"invalid scenario ({len(self.violations)} violation(s)): {lines}")


class NoDemandError(LegrmError, ValueError):
    """Every demand cell is zero, so there is nothing to price."""


class ConvergenceError(LegrmError, ArithmeticError):
    """The dual root finder did not reach tolerance within its iteration budget."""


class InfeasibleError(LegrmError, ValueError):
    """A (partial) price assignment cannot satisfy the capacity constraint."""


class SearchBudgetExceeded(LegrmError, RuntimeError):
    """Branch and bound expanded more nodes than its budget allows."""


class PolicyError(LegrmError, ValueError):
    """A policy is malformed or does not cover the scenario."""


class ShapeMismatchError(LegrmError, ValueError):
    """Two scenarios that must share a shape do not."""
