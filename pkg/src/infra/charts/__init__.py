"""Diagnostic charts."""
