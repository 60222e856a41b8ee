"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class SignatureError(ToolkitError):
    """Bad signature, unknown symbol, or arity mismatch."""


class FormulaParseError(ToolkitError):
    """Syntax error in formula or scheme text; carries a 1-based offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class BindingError(ToolkitError):
    """Formula does not bind against a signature (symbols, arities, variables)."""


class BudgetError(ToolkitError):
    """A configured enumeration budget or size cap was exceeded."""


class ValidationError(ToolkitError):
    """A semantic certificate failed (symmetry, equivalence, compatibility,
    class size); carries a witness when one exists."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class UnboundedDegreeError(ToolkitError):
    """Sampled terms exceed the declared maximum-degree cap."""
