"""Exception hierarchy.

Every error raised on bad input derives from :class:`DataError`; the CLI maps
:class:`ConfigError` to exit code 1 and :class:`DataError` to exit code 2.
"""


class EntitymetricsError(Exception):
    pass


class ConfigError(EntitymetricsError):
    pass


class DataError(EntitymetricsError):
    pass


class CorpusError(DataError):
    pass


class QuerySyntaxError(DataError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at byte {position})"
        super().__init__(message)
        self.position = position


class DictionaryError(DataError):
    pass


class GraphFormatError(DataError):
    pass


class DegenerateGraphError(DataError):
    pass


class CuratedDbError(DataError):
    pass
