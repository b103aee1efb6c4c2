import numpy as np


def synthetic_frames(n, size=336):
    """Deterministic RGB frames whose content changes with the frame index."""
    y, x = np.mgrid[0:size, 0:size]
    frames = []
    for t in range(n):
        r = (x + 2 * t) % 256
        g = (3 * y + t) % 256
        b = ((x ^ y) + 5 * t) % 256
        frames.append(np.stack([r, g, b], axis=-1).astype(np.uint8))
    return frames
