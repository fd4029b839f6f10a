"""Compilation-free source-to-sink dataflow analysis for Java with model-assisted phases."""

__version__ = "0.1.0"
