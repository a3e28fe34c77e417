"""Fog colony layout optimization."""
