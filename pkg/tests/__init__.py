"""Tests for the SIM secrecy simulator, trainer and experiment server."""
