"""Exception types shared across the package."""


class HypothesisError(Exception):
    """A standing hypothesis of the method is violated by the inputs.

    Raised eagerly (at config/spec construction or during precomputation), never
    silently worked around: e.g. a form that is identically a non-norm modulo the
    sieve support, a degenerate discriminant, or a field/form pair for which no
    admissible base point exists.  The CLI maps this to exit code 2.
    """


class ResourceBudgetError(Exception):
    """A precomputation would exceed its declared memory budget.

    Carries enough context to pick a smaller table or a different strategy.
    """

    def __init__(self, message: str, needed_bytes: int = 0, budget_bytes: int = 0):
        super().__init__(message)
        self.needed_bytes = needed_bytes
        self.budget_bytes = budget_bytes
