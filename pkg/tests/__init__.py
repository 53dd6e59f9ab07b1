"""Tests for CritState."""
