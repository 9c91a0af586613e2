"""Keeps this directory importable so test modules can share oracle helpers."""
