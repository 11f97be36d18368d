"""Exception hierarchy shared by all stages of the pipeline."""


class BriotBouquetError(Exception):
    """Base class; every error raised deliberately by the package derives from it."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DivisionByZeroDenominator(BriotBouquetError):
    code = "division_by_zero_denominator"


class InternalInconsistency(BriotBouquetError):
    code = "internal_inconsistency"


class OdeSyntaxError(BriotBouquetError):
    """Malformed problem text. ``position`` is a 0-based character offset."""

    code = "syntax_error"

    def __init__(self, message, text="", position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
            if text:
                message += f"\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class NonAutonomousError(BriotBouquetError):
    code = "non_autonomous"


class UndeclaredSymbolError(BriotBouquetError):
    code = "undeclared_symbol"


class TruncationTooShort(BriotBouquetError):
    code = "truncation_too_short"


class NoPoleFamily(BriotBouquetError):
    code = "no_pole_family"


class LogarithmRequired(BriotBouquetError):
    """A positive Fuchs index whose compatibility condition fails.

    ``obstruction`` is the numerator (a polynomial in the parameters) that
    must vanish for the Laurent series to exist without logarithms.
    """

    code = "logarithm_required"

    def __init__(self, index, obstruction, rendered=None):
        self.index = index
        self.obstruction = obstruction
        self.rendered = rendered if rendered is not None else str(obstruction)
        super().__init__(
            f"compatibility condition fails at Fuchs index {index}: "
            f"obstruction {self.rendered} != 0"
        )

    def to_dict(self):
        d = super().to_dict()
        d.update(index=self.index, obstruction=self.rendered)
        return d


class DegenerateBalance(BriotBouquetError):
    """Leading coefficient is a multiple root; the linearised operator is degenerate."""

    code = "degenerate_balance"


class UnresolvedConstraints(BriotBouquetError):
    code = "unresolved_constraints"

    def __init__(self, message, residuals=()):
        self.residuals = list(residuals)
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        d["residuals"] = [str(r) for r in self.residuals]
        return d


class UnsupportedSingularity(BriotBouquetError):
    code = "unsupported_singularity"


class IrrationalSingularLocus(BriotBouquetError):
    code = "irrational_singular_locus"


class NoClosedForm(BriotBouquetError):
    code = "no_closed_form"

    def __init__(self, message, system=()):
        self.system = list(system)
        super().__init__(message)


class PrecisionLoss(BriotBouquetError):
    code = "precision_loss"


class AllPointsSingular(BriotBouquetError):
    code = "all_points_singular"

    def __init__(self, message, seed=None):
        self.seed = seed
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        d["seed"] = self.seed
        return d


class ProblemFileError(BriotBouquetError):
    """A problem or report file that cannot be read; carries file and line context."""

    code = "problem_file"

    def __init__(self, message, source="<problem>", line=None, cause=None):
        self.source = source
        self.line = line
        self.cause = cause
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")

    def to_dict(self):
        d = super().to_dict()
        d.update(source=self.source, line=self.line)
        if self.cause is not None:
            d["cause"] = self.cause
        return d
