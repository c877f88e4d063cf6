"""Typed failures shared across the package."""


class FtsensError(Exception):
    """Base class; ``code`` is the CLI exit status for the failure."""

    code = 1


class IncompatibleRepresentation(FtsensError):
    pass


class PrecisionEscalation(FtsensError):
    """Raised internally when a window is too narrow; callers widen and retry."""


class IntegratorDivergence(FtsensError):
    pass


class UnsupportedRadius(FtsensError):
    pass


class NotIncreasedWithinBudget(FtsensError):
    def __init__(self, budget, context=None):
        self.budget = budget
        self.context = context
        msg = f"diameter did not exceed the threshold within {budget} steps"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class BisectionStalled(FtsensError):
    pass


class RadiusWindowEmpty(FtsensError):
    def __init__(self, m, detail=""):
        self.m = m
        super().__init__(f"no radius puts the first increasing time in the window at stage {m}"
                         + (f": {detail}" if detail else ""))


class NoConvergence(FtsensError):
    pass


class NoChain(FtsensError):
    pass


class SplitFailed(FtsensError):
    def __init__(self, level, detail=""):
        self.level = level
        super().__init__(f"split failed at level {level}" + (f": {detail}" if detail else ""))


class ConfigError(FtsensError):
    pass
