"""Tests for marketclear."""
