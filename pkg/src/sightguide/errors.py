"""Error types shared by the gateway, backend clients, and evaluation tools."""


class GatewayError(Exception):
    """Base class for service-level failures. `code` keys the HTTP mapping."""

    code = "internal"
    retryable = False


class ConfigError(GatewayError):
    code = "config"


class NotFoundError(GatewayError):
    code = "not_found"


class BusyError(GatewayError):
    """A query is already in flight on this session."""

    code = "busy"


class NotReadyError(GatewayError):
    """The requested result exists but is still being produced."""

    code = "not_ready"


class QueryFailedError(GatewayError):
    """The query's pipeline failed; no completed answer is available."""

    code = "query_failed"


class NoFrameError(GatewayError):
    """Frame selection was attempted against an empty frame buffer."""

    code = "no_frame"


class EmptyReportError(GatewayError):
    """A timing report was requested before any query completed."""

    code = "empty_report"


class ProtocolError(GatewayError):
    """A backend request or response violated the wire protocol."""

    code = "protocol"


class BackendTimeout(GatewayError):
    """A backend did not answer within the configured timeout."""

    code = "timeout"
    retryable = True
