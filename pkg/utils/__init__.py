"""
utils/__init__.py

Shared plumbing for the polytrope toolkit: logging, configuration, emitters.
"""
