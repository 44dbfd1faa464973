"""Exception hierarchy.

Every error carries an ``exit_code``: 1 for mathematical/validation failures,
2 for results that are inconclusive because a degree or level cap was hit.
"""


class StratError(Exception):
    kind = "error"
    exit_code = 1


class DimensionError(StratError, ValueError):
    kind = "dimension"


class UnknownVariableError(StratError, KeyError):
    kind = "name"

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown variable"


class ParseError(StratError, ValueError):
    kind = "parse"


class ValidationError(StratError, ValueError):
    kind = "validation"


class InvertibilityError(StratError, ValueError):
    kind = "invertibility"


class IntegrabilityError(StratError, ValueError):
    kind = "integrability"


class FlatnessError(StratError, ValueError):
    """Nonzero p-curvature: the connection has no Cartier descent."""

    kind = "flatness"


class StratificationObstruction(StratError, ValueError):
    """The level-i induced connection does not extend one level further."""

    kind = "stratification-obstruction"

    def __init__(self, level, detail=""):
        self.level = level
        msg = f"stratification obstruction at level {level}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class LevelExceededError(StratError, ValueError):
    kind = "level-exceeded"


class ModeError(StratError, ValueError):
    kind = "mode"


class InconclusiveError(StratError):
    """A configured cap was reached before an answer was found."""

    kind = "inconclusive"
    exit_code = 2


class DegreeBoundError(InconclusiveError):
    kind = "degree-bound-exceeded"

    def __init__(self, bound, detail=""):
        self.bound = bound
        msg = f"no unit-determinant frame within degree bound {bound}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class TruncationClosureError(InconclusiveError):
    kind = "truncation-closure"

    def __init__(self, level, degree_cap, detail=""):
        self.level = level
        self.degree_cap = degree_cap
        msg = f"action leaves the truncated module (level {level}, degree cap {degree_cap})"
        super().__init__(f"{msg}: {detail}" if detail else msg)
