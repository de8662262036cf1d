"""Exception taxonomy shared across the pipeline, agents, and providers."""


class XrAuthorError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(XrAuthorError):
    """Input failed a domain invariant (bad request fields, bad spec edit)."""


class InvalidArgument(XrAuthorError):
    """A function was called with arguments outside its contract."""


class IllegalState(XrAuthorError):
    """An operation was attempted in a job state that does not allow it."""


class StorageError(XrAuthorError):
    """The job store could not read or write persistent state."""


class ConflictError(StorageError):
    """A stale job version was offered for saving (lost-update guard)."""


class UnknownJob(StorageError):
    """No persisted job exists under the given id."""


# ── Provider-side failures ────────────────────────────────────────────────

class ProviderError(XrAuthorError):
    """An external provider failed in a way retries could not fix."""

    retryable = False


class AuthError(ProviderError):
    """Credentials were rejected by the provider."""


class RateLimited(ProviderError):
    """The provider asked us to slow down; safe to retry with backoff."""

    retryable = True


class TransientProviderError(ProviderError):
    """Server-side hiccup (5xx and friends); safe to retry with backoff."""

    retryable = True


class TimeoutError(ProviderError):  # noqa: A001 - deliberate, scoped to this module
    """A provider call or poll loop ran past its deadline."""

    retryable = True


class QuotaExceeded(ProviderError):
    """The provider account has no generation budget left."""


class NetworkError(ProviderError):
    """Transport-level failure, including truncated downloads."""


class NotFound(ProviderError):
    """The requested remote resource does not exist."""


class UnknownTask(ProviderError):
    """poll_generation was asked about a task id the provider never issued."""


class SearchError(ProviderError):
    """The search provider could not answer; callers may degrade gracefully."""


class MockFixtureMissing(ProviderError):
    """Mock mode had no fixture file for the requested input."""

    def __init__(self, message: str, *, key: str | None = None, path: str | None = None):
        super().__init__(message)
        self.key = key
        self.path = path


class Cancelled(ProviderError):
    """A poll loop was cancelled because its job was aborted."""


# ── Agent output failures ─────────────────────────────────────────────────

class MalformedOutput(XrAuthorError):
    """The model reply never matched the required schema, even after repairs."""


class NoJsonFound(XrAuthorError):
    """No parseable JSON object could be located in a model reply."""
