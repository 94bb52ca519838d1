"""Unit tests for the leapstack package."""
