"""Unit test package for loclab."""
