"""Exception types shared across netsvm.

Every error raised on purpose derives from :class:`NetsvmError`. The CLI maps
the families below onto its exit codes (parse -> 2, I/O -> 3, training -> 4,
schema -> 5).
"""


class NetsvmError(Exception):
    """Base class for all netsvm errors."""


# -- parsing (exit 2) -------------------------------------------------------


class ParseError(NetsvmError):
    """Base class for input syntax problems."""


class EmptyInput(ParseError):
    """The input stream contained no text at all."""


class MalformedRow(ParseError):
    """A capture CSV row that does not satisfy the packet schema."""

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class CaptureParseError(ParseError):
    """One or more malformed rows were found while parsing a capture."""

    def __init__(self, rows, source=None):
        self.rows = list(rows)
        self.source = source
        where = f"{source}: " if source else ""
        head = "; ".join(str(r) for r in self.rows[:5])
        more = f" (+{len(self.rows) - 5} more)" if len(self.rows) > 5 else ""
        super().__init__(f"{where}{len(self.rows)} malformed row(s): {head}{more}")


class ArffSyntax(ParseError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"ARFF line {line}: {reason}")


class UnsupportedFeature(ParseError):
    """ARFF construct outside the supported subset (sparse rows, date, relational)."""


# -- dataset / schema (exit 5 when raised against a model) -----------------


class DatasetError(NetsvmError):
    pass


class IndexOutOfRange(DatasetError):
    pass


class UnknownAttribute(DatasetError):
    pass


class NotNominal(DatasetError):
    pass


class NotNumeric(DatasetError):
    pass


class AllMissing(DatasetError):
    pass


class EmptyDataset(DatasetError):
    pass


class NotNominalClass(NotNominal):
    pass


class SchemaMismatch(DatasetError):
    """Data attributes do not line up with what an encoder/model expects."""


class UnseenNominal(SchemaMismatch):
    def __init__(self, attribute, value):
        self.attribute = attribute
        self.value = value
        super().__init__(f"attribute {attribute!r}: value {value!r} was not seen at fit time")


class MissingClassValue(DatasetError):
    pass


class DegenerateSplit(DatasetError):
    pass


# -- SVM (exit 4 during training) ------------------------------------------


class SvmError(NetsvmError):
    pass


class DimensionMismatch(SvmError):
    pass


class EmptyClass(SvmError):
    pass


class SingleClass(SvmError):
    pass


class ModelFormatError(NetsvmError):
    pass


class VersionMismatch(ModelFormatError):
    pass


class CorruptModel(ModelFormatError):
    def __init__(self, line, reason="unexpected content"):
        self.line = line
        self.reason = reason
        super().__init__(f"model line {line}: {reason}")


# -- evaluation ------------------------------------------------------------


class EvalError(NetsvmError):
    pass


class LengthMismatch(EvalError):
    pass


class UnknownLabel(EvalError):
    pass


class EmptyMatrix(EvalError):
    pass


class ConvergenceWarning(UserWarning):
    """SMO stopped at the iteration cap before reaching the KKT tolerance."""


class DegenerateFeatureWarning(UserWarning):
    """A numeric feature has a zero range and is encoded as a constant 0."""
