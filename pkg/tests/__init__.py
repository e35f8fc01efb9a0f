"""Tests package for the even-initialization lab."""
