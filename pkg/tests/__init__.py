"""Tests for entrolab."""
