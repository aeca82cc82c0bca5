"""Optional OpenTelemetry spans around experiment trials.

The SDK is bootstrapped only when ``OTEL_EXPORTER_OTLP_ENDPOINT`` is set;
otherwise :func:`trace_span` yields a plain dict and records nothing.

Dependencies: (stdlib only, optional opentelemetry)
Wired in: cli.py → main(), harness/runner.py → _run_trial()
"""

from __future__ import annotations

import logging
import os
import threading
from collections.abc import Generator
from contextlib import contextmanager
from types import ModuleType
from typing import Any

_log = logging.getLogger(__name__)

TRACER_NAME = "kmis"
_SERVICE_NAME_DEFAULT = "kmis"

SpanValue = str | int | float | bool

_configure_lock = threading.Lock()
_configured = False


def _import_trace() -> ModuleType | None:
    try:
        from opentelemetry import trace as _t

        return _t
    except ModuleNotFoundError:
        return None


def _install_provider(endpoint: str) -> bool:
    trace_mod = _import_trace()
    if trace_mod is None:
        _log.warning(
            "OTEL_EXPORTER_OTLP_ENDPOINT is set but opentelemetry is not installed; "
            "trial spans are disabled"
        )
        return False
    try:
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
        from opentelemetry.sdk.resources import Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor
    except ModuleNotFoundError:
        _log.warning("opentelemetry SDK or OTLP exporter missing; trial spans are disabled")
        return False

    service_name = os.getenv("OTEL_SERVICE_NAME", _SERVICE_NAME_DEFAULT)
    resource = Resource.create(
        {
            "service.name": service_name,
            "kmis.experiment": os.getenv("KMIS_EXPERIMENT_NAME", "adhoc"),
            "kmis.workers": os.getenv("KMIS_WORKERS", "default"),
        }
    )
    provider = TracerProvider(resource=resource)
    insecure = os.getenv("OTEL_EXPORTER_OTLP_INSECURE", "true").lower() == "true"
    provider.add_span_processor(
        BatchSpanProcessor(OTLPSpanExporter(endpoint=endpoint, insecure=insecure))
    )
    trace_mod.set_tracer_provider(provider)
    _log.info("Trial spans exported to %s (service=%s)", endpoint, service_name)
    return True


def configure() -> None:
    """Install the tracer provider once; later calls are no-ops."""
    global _configured
    endpoint = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
    if not endpoint:
        return
    with _configure_lock:
        if _configured:
            return
        _configured = _install_provider(endpoint)


@contextmanager
def trace_span(
    name: str,
    attributes: dict[str, SpanValue] | None = None,
) -> Generator[dict[str, Any], None, None]:
    """Open span ``name`` when opentelemetry is importable.

    Yields a dict; entries added to it are set on the span when it closes.
    """
    result_attrs: dict[str, Any] = {}
    trace_mod = _import_trace()
    if trace_mod is None:
        yield result_attrs
        return

    with trace_mod.get_tracer(TRACER_NAME).start_as_current_span(name) as span:
        for key, value in (attributes or {}).items():
            span.set_attribute(key, value)
        yield result_attrs
        for key, value in result_attrs.items():
            span.set_attribute(key, value)
