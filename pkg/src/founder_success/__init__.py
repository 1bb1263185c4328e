"""Founder success prediction from LinkedIn profiles.

Profiles are summarised and labelled by an LLM (experience level, personas,
binary flags), combined with keyword-mapped education features, and fed to
three classifiers.
"""

__version__ = "0.1.0"
