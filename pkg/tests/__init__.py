"""Tests for wdp-triage."""
