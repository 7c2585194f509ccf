from typing import Optional
from .exit_codes import EXIT_CODES, EXIT_INVALID, EXIT_TOLERANCE


class SlaterError(Exception):
    exit_code: int = EXIT_INVALID

    def __init__(
        self,
        detail: Optional[str] = None,
        exit_code: Optional[int] = None
    ) -> None:
        '''
        Carries a detail message and the process exit code the CLI reports for it.
        '''
        if exit_code is None:
            exit_code = type(self).exit_code
        if exit_code not in EXIT_CODES:
            raise SlaterError(f"Wrong exit code defined: {exit_code}.")
        self.exit_code = exit_code
        self.detail = detail
        super().__init__(detail)

    def __str__(self) -> str:
        s = EXIT_CODES[self.exit_code]
        if self.detail is not None:
            s += f": {self.detail}"
        return s


class DomainError(SlaterError):
    pass


class DimensionError(SlaterError):
    pass


class ParameterError(SlaterError):
    pass


class ModelError(SlaterError):
    pass


class ExpressionSyntaxError(SlaterError):
    def __init__(self, detail: str, position: int) -> None:
        self.position = position
        super().__init__(f"{detail} at offset {position}")


class EvaluationError(SlaterError):
    def __init__(self, detail: str, node: str) -> None:
        self.node = node
        super().__init__(f"{detail} in '{node}'")


class TurningPointError(SlaterError):
    pass


class NonIntegrableTermError(SlaterError):
    pass


class NumericalError(SlaterError):
    pass


class ConfigError(SlaterError):
    pass


class ToleranceExceeded(SlaterError):
    exit_code = EXIT_TOLERANCE
