class AdvContractsError(Exception):
    """Base class for errors raised by advcontracts."""


class ScenarioError(AdvContractsError, ValueError):
    """The scenario document is malformed or incomplete."""


class DomainError(AdvContractsError, ValueError):
    """A privacy level lies outside of [0, 1]."""


class InvalidModelError(AdvContractsError):
    """The market model breaks one or more modelling assumptions.

    Args:
        report (ValidationReport): The violations found by the validator.
    """

    def __init__(self, report):
        self.report = report
        names = ', '.join(sorted(report.invariants))
        super().__init__('invalid market model: %s' % names)


class ClassificationError(AdvContractsError):
    """The adversary cost coincides with the price-contract curve on an interval."""


class NoBoundError(AdvContractsError):
    """No revenue guarantee exists for the approximation outcome."""


class DPError(AdvContractsError):
    """Base class for errors raised by the query engine."""


class BudgetExceeded(DPError):
    """The query would spend more privacy budget than was purchased."""


class DuplicateQueryType(DPError):
    """The bundle already holds a query of the same type."""


class UnknownColumn(DPError, KeyError):
    """The query refers to a column without declared bounds."""
