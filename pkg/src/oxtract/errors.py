"""Exception taxonomy shared across the package."""

from __future__ import annotations


class OxtractError(Exception):
    """Base class for all package errors."""


class SourceError(OxtractError):
    """An error anchored to a position in wrapper source text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnterminatedString(SourceError):
    pass


class IllegalCharacter(SourceError):
    pass


class WrapperParseError(SourceError):
    """Syntax error with the set of constructs that would have been accepted."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        super().__init__(message, line, column)
        self.expected = expected


class UnsupportedFeature(WrapperParseError):
    """A construct recognized but deliberately outside the language subset."""


class NoActionTarget(OxtractError):
    """An action fired on a node with no click/submit/fill behaviour."""


class UnresolvableHref(OxtractError):
    pass


class FetchError(OxtractError):
    def __init__(self, url: str, reason: str):
        super().__init__(f"fetch failed for {url}: {reason}")
        self.url = url
        self.reason = reason


class CacheMiss(FetchError):
    def __init__(self, url: str):
        super().__init__(url, "not in replay cache")


class TooManyRedirects(FetchError):
    def __init__(self, url: str, limit: int):
        super().__init__(url, f"more than {limit} redirects")
        self.limit = limit


class IterationCapExceeded(OxtractError):
    def __init__(self, cap: int):
        super().__init__(f"repetition group exceeded the iteration cap of {cap}")
        self.cap = cap


class PageLimitExceeded(OxtractError):
    def __init__(self, limit: int):
        super().__init__(f"run exceeded the page limit of {limit}")
        self.limit = limit


class RunAborted(OxtractError):
    """A wrapper run stopped early; stats cover the work done so far."""

    def __init__(self, cause: Exception, stats):
        super().__init__(f"run aborted: {cause}")
        self.cause = cause
        self.stats = stats


class TooDeepForCsv(OxtractError):
    def __init__(self, depth: int):
        super().__init__(f"record tree nests {depth} levels below the root; CSV allows 2")
        self.depth = depth


class CollectionFormatError(OxtractError):
    pass


class UnknownField(OxtractError):
    def __init__(self, name: str):
        super().__init__(f"field {name!r} is not in the configured vocabulary")
        self.name = name


class DuplicateHarvestKey(OxtractError):
    def __init__(self, key: str):
        super().__init__(f"harvest records share the join key {key!r}")
        self.key = key


class InvalidSpec(OxtractError):
    pass
