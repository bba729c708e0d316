"""Benchmark harness: emulated endpoints, the scenario catalog and scoring."""
