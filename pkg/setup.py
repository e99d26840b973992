#!/usr/bin/env python3
"""
Setup script for the iqvip package.

Configuration lives in pyproject.toml; this shim keeps legacy
``python setup.py`` invocations working.
"""

from setuptools import setup

if __name__ == "__main__":
    setup()
