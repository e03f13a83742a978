"""Exception type shared by every stage of the pipeline."""


class MorphError(Exception):
    """Error carrying a stable, machine-readable ``code``.

    ``detail`` holds optional structured context (for example the
    ValidationReport behind a VALIDATION_ERROR).
    """

    def __init__(self, code, message, detail=None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.detail = detail


# Codes that the CLI maps to exit status 2 instead of 1.
INFEASIBLE_CODES = frozenset({"INFEASIBLE", "EMPTY_FRONT"})
