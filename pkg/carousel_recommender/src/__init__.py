"""
Carousel Recommender Source Package

This package contains the catalog, similarity, provider, carousel and evaluation code
behind the carousel command-line tool.
"""

from .main import main

__all__ = ['main']
