"""Compiler and runtime simulator for Cloak confidential smart contracts."""

__version__ = "0.1.0"
RUNTIME_VERSION = "0.1.0"
