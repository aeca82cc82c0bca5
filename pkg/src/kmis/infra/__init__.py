"""Process-level plumbing shared by the CLI and the experiment harness.

Internal: otel_tracing
"""
