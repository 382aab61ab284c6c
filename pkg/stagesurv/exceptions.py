EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_PARTIAL = 4


class StageSurvException(RuntimeError):
    def __init__(self, message: str, exit_code: int = EXIT_DATA_ERROR):
        super().__init__(message)
        self.exit_code = exit_code


class ConfigError(StageSurvException):
    def __init__(self, message: str):
        super().__init__(message, exit_code=EXIT_CONFIG_ERROR)


class DataError(StageSurvException):
    def __init__(self, message: str):
        super().__init__(message, exit_code=EXIT_DATA_ERROR)


class SchemaMismatchError(DataError):
    def __init__(self, column: str):
        super().__init__(f"Input is missing schema column: {column}")
        self.column = column


class DataValidationError(DataError):
    pass


class DimensionError(DataError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Row has {got} features, model expects {expected}")
        self.expected = expected
        self.got = got


class FitError(StageSurvException):
    pass


class UndefinedMetricError(StageSurvException):
    pass


class ExplanationError(StageSurvException):
    pass
