"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violated an operation's precondition."""


class DimensionMismatch(ContractError):
    """Points of different dimension were combined."""


class BudgetExceeded(RuntimeError):
    """An exponential computation hit its configured node budget.

    Raised instead of silently truncating the result.
    """

    def __init__(self, budget, what="enumeration"):
        super().__init__(f"{what} exceeded its node budget of {budget}")
        self.budget = budget
        self.what = what
