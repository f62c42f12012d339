"""
Carousel Recommender - multi-carousel book recommendations with beyond-accuracy strategies.

This package selects themed carousels per library user, fills them with the original,
diversity, serendipity, novelty or combined strategy, and evaluates the result with
exact-match and similarity-based measures.
"""

__version__ = "1.0.0"
