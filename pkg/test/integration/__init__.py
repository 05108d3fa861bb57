"""Integration tests for seesawtrack workflows."""
