"""Tool integration tests."""
