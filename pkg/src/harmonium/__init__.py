"""Formant-based vowel harmony analysis toolkit."""

__version__ = "0.1.0"
