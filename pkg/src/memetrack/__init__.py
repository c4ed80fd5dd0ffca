"""Meme detection and cross-community influence measurement toolkit.

Pipeline stages: perceptual hashing, all-pairs Hamming comparison, density
clustering, encyclopedia annotation, a weighted cluster metric with
dendrogram/graph views, post-to-cluster association with reports, and
Hawkes-process influence attribution. See the CLI in memetrack.cli for the
stage-by-stage interface.
"""

__version__ = "0.1.0"
