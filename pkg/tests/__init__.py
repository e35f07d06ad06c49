"""Tests for cutmpc."""
