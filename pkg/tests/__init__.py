"""Test suite for fstirap-cavity."""
