from __future__ import annotations

from resilient_ham.config import get_settings, reset_settings
from resilient_ham.telemetry import (
    NoopRunMetrics,
    OTelRunMetrics,
    resolve_otlp_metrics_endpoint,
    resolve_otlp_traces_endpoint,
    setup_telemetry,
    shutdown_telemetry,
)


def test_resolve_otlp_traces_endpoint_base_url():
    assert resolve_otlp_traces_endpoint("http://127.0.0.1:4318") == "http://127.0.0.1:4318/v1/traces"


def test_resolve_otlp_traces_endpoint_passthrough():
    assert resolve_otlp_traces_endpoint("http://collector:4318/v1/traces/") == "http://collector:4318/v1/traces"


def test_resolve_otlp_metrics_endpoint_base_url():
    assert resolve_otlp_metrics_endpoint("http://127.0.0.1:4318/") == "http://127.0.0.1:4318/v1/metrics"


def test_resolve_otlp_metrics_endpoint_passthrough():
    assert resolve_otlp_metrics_endpoint("http://collector:4318/v1/metrics") == "http://collector:4318/v1/metrics"


def test_telemetry_settings_from_env(monkeypatch):
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__ENABLED", "true")
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__OTLP_ENDPOINT", "http://127.0.0.1:4318")
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__OTLP_TIMEOUT_SECONDS", "1")
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__METRICS_EXPORT_INTERVAL_MS", "1000")
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__SAMPLE_RATIO", "0.25")
    reset_settings()

    settings = get_settings()
    assert settings.telemetry.enabled is True
    assert settings.telemetry.otlp_endpoint == "http://127.0.0.1:4318"
    assert settings.telemetry.otlp_timeout_seconds == 1
    assert settings.telemetry.metrics_export_interval_ms == 1000
    assert settings.telemetry.sample_ratio == 0.25

    reset_settings()


def test_telemetry_headers_from_env(monkeypatch):
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__OTLP_HEADERS__AUTHORIZATION", "Bearer token")
    reset_settings()

    assert get_settings().telemetry.otlp_headers == {"authorization": "Bearer token"}

    reset_settings()


def test_disabled_telemetry_is_a_noop(monkeypatch):
    monkeypatch.delenv("RESILIENT_HAM_TELEMETRY__ENABLED", raising=False)
    reset_settings()

    runtime = setup_telemetry(get_settings())
    assert runtime.enabled is False
    assert isinstance(runtime.run_metrics, NoopRunMetrics)
    runtime.run_metrics.record(stage="P1", status="ok", duration_ms=1.0)
    shutdown_telemetry(runtime)

    reset_settings()


def test_enabled_telemetry_starts_and_shuts_down(monkeypatch):
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__ENABLED", "true")
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__OTLP_ENDPOINT", "http://127.0.0.1:65535")
    monkeypatch.setenv("RESILIENT_HAM_TELEMETRY__OTLP_TIMEOUT_SECONDS", "0.1")
    reset_settings()

    runtime = setup_telemetry(get_settings())
    assert runtime.enabled is True
    assert isinstance(runtime.run_metrics, OTelRunMetrics)
    with runtime.tracer.start_as_current_span("find_hamilton_cycle"):
        runtime.run_metrics.record(stage="partition", status="ok", duration_ms=2.5)
    shutdown_telemetry(runtime)

    reset_settings()
