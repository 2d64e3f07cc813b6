"""Shared constants for on-disk artifacts."""

FORMAT_VERSION = "1"
