"""Exception hierarchy shared by every module."""


class SuffQuantError(Exception):
    """Base class for all library errors."""


class ModelError(SuffQuantError, ValueError):
    pass


class NegativeProbability(ModelError):
    pass


class RowNotNormalized(ModelError):
    pass


class AlphabetMismatch(ModelError):
    pass


class EmptySubset(ModelError):
    pass


class NullConditioningEvent(ModelError):
    """The conditioning event has zero probability."""


class DegenerateModel(ModelError):
    pass


class MissingHiddenAxis(ModelError):
    pass


class FactorizationFails(SuffQuantError):
    pass


class HciInvalid(SuffQuantError):
    """Raised by ``validate_hci`` when a Markov chain of the HCI model fails.

    The failing :class:`~suffquant.sufficiency.HciReport` is kept on ``report``.
    """

    def __init__(self, report):
        super().__init__(
            f"HCI chains violated (chain A deviation {report.chain_a.max_deviation:.3g}, "
            f"chain B deviation {report.chain_b.max_deviation:.3g})"
        )
        self.report = report


class BudgetExceeded(SuffQuantError):
    pass


class SingularCovariance(SuffQuantError):
    pass


class InsufficientSamples(SuffQuantError):
    pass
