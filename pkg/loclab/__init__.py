"""Top-level package for loclab."""

__author__ = """loclab developers"""
__version__ = '0.1.0'
