"""Exception types shared across modules."""


class BabylonError(Exception):
    pass


class EmptyContent(BabylonError, ValueError):
    pass


class SchemaError(BabylonError):
    def __init__(self, column):
        super().__init__(column)
        self.column = column


class RowError(BabylonError):
    def __init__(self, line_number, reason):
        super().__init__(f"row at line {line_number}: {reason}")
        self.line_number = line_number


class MissingTruth(BabylonError):
    pass


class AlignmentError(BabylonError, ValueError):
    pass


class CoverageError(BabylonError):
    pass


class EmptyStore(BabylonError):
    pass


class EmbedError(BabylonError):
    pass


class TransportError(BabylonError):
    pass
