"""Metamorphic security testing for Web systems.

Relations are written in a small DSL, source inputs are collected by crawling
the target, and the engine runs every relation over every view of the pool.
"""

__version__ = "0.1.0"
