import numpy as np

from cramsim.grid import BinaryFrame


def frame_of(art: str) -> BinaryFrame:
    """Build a frame from ASCII art: '#' or '1' is a set pixel, '.' or '0' clear."""
    rows = [line.strip() for line in art.strip().splitlines()]
    grid = np.array(
        [[1 if ch in "#1" else 0 for ch in row] for row in rows], dtype=np.uint8
    )
    return BinaryFrame(grid)
