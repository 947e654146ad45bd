"""OpenTelemetry setup for resilient-ham."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.http.metric_exporter import OTLPMetricExporter
from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.metrics.export import PeriodicExportingMetricReader
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.sdk.trace.sampling import TraceIdRatioBased

from resilient_ham import PACKAGE_NAME
from resilient_ham.config import Settings


class RunMetrics(Protocol):
    """Pipeline stage metrics recorder contract."""

    def record(self, *, stage: str, status: str, duration_ms: float) -> None:
        """Record one finished pipeline stage."""


@dataclass(slots=True)
class NoopRunMetrics:
    """No-op implementation used when telemetry is disabled."""

    def record(self, *, stage: str, status: str, duration_ms: float) -> None:
        del stage, status, duration_ms


@dataclass(slots=True)
class OTelRunMetrics:
    """OpenTelemetry-backed stage metrics recorder."""

    stage_counter: object
    duration_histogram: object

    def record(self, *, stage: str, status: str, duration_ms: float) -> None:
        attributes = {"stage": stage, "status": status}
        self.stage_counter.add(1, attributes=attributes)
        self.duration_histogram.record(max(0.0, duration_ms), attributes=attributes)


def resolve_otlp_traces_endpoint(endpoint: str) -> str:
    """Normalize collector endpoint to an OTLP traces path."""
    cleaned = endpoint.rstrip("/")
    if cleaned.endswith("/v1/traces"):
        return cleaned
    return f"{cleaned}/v1/traces"


def resolve_otlp_metrics_endpoint(endpoint: str) -> str:
    """Normalize collector endpoint to an OTLP metrics path."""
    cleaned = endpoint.rstrip("/")
    if cleaned.endswith("/v1/metrics"):
        return cleaned
    return f"{cleaned}/v1/metrics"


def _noop_tracer() -> trace.Tracer:
    return trace.NoOpTracerProvider().get_tracer(PACKAGE_NAME)


@dataclass(slots=True)
class TelemetryRuntime:
    """Holds telemetry runtime state for one CLI invocation."""

    enabled: bool = False
    tracer_provider: TracerProvider | None = None
    meter_provider: MeterProvider | None = None
    tracer: trace.Tracer = field(default_factory=_noop_tracer)
    run_metrics: RunMetrics = field(default_factory=NoopRunMetrics)


def setup_telemetry(settings: Settings) -> TelemetryRuntime:
    """Initialize the OpenTelemetry SDK when enabled; a no-op runtime otherwise."""
    if not settings.telemetry.enabled:
        return TelemetryRuntime()

    resource = Resource.create(
        {
            "service.name": settings.service_name,
            "service.version": settings.service_version,
        }
    )
    tracer_provider = TracerProvider(
        resource=resource,
        sampler=TraceIdRatioBased(settings.telemetry.sample_ratio),
    )

    exporter = OTLPSpanExporter(
        endpoint=resolve_otlp_traces_endpoint(settings.telemetry.otlp_endpoint),
        headers=settings.telemetry.otlp_headers or None,
        timeout=settings.telemetry.otlp_timeout_seconds,
    )
    tracer_provider.add_span_processor(BatchSpanProcessor(exporter))

    metric_exporter = OTLPMetricExporter(
        endpoint=resolve_otlp_metrics_endpoint(settings.telemetry.otlp_endpoint),
        headers=settings.telemetry.otlp_headers or None,
        timeout=settings.telemetry.otlp_timeout_seconds,
    )
    metric_reader = PeriodicExportingMetricReader(
        metric_exporter,
        export_interval_millis=settings.telemetry.metrics_export_interval_ms,
    )
    meter_provider = MeterProvider(
        resource=resource,
        metric_readers=[metric_reader],
    )
    meter = meter_provider.get_meter(PACKAGE_NAME)

    run_metrics = OTelRunMetrics(
        stage_counter=meter.create_counter(
            name="resilient_ham_stage_total",
            unit="1",
            description="Count of pipeline stages by stage and status.",
        ),
        duration_histogram=meter.create_histogram(
            name="resilient_ham_stage_duration_ms",
            unit="ms",
            description="Wall time of pipeline stages.",
        ),
    )

    return TelemetryRuntime(
        enabled=True,
        tracer_provider=tracer_provider,
        meter_provider=meter_provider,
        tracer=tracer_provider.get_tracer(PACKAGE_NAME),
        run_metrics=run_metrics,
    )


def shutdown_telemetry(runtime: TelemetryRuntime) -> None:
    """Flush and shut down the export pipeline."""
    if not runtime.enabled:
        return

    if runtime.meter_provider is not None:
        runtime.meter_provider.shutdown()

    if runtime.tracer_provider is not None:
        runtime.tracer_provider.shutdown()
