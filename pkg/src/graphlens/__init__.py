"""graphlens: node classification for topologically mixed graphs.

Random-walk lenses capture local structure around every node, canonical
adjacency images make that structure classifier-friendly, and LP-learned
lens weights fuse the per-lens labels into thresholded top-k predictions.
"""

__version__ = "0.1.0"
