"""Checkerboard preview of a UV layout as a standalone SVG document."""

from __future__ import annotations

import numpy as np

LIGHT = "#ffffff"
DARK = "#202020"


def emit_checkerboard_svg(uv, faces, cells: int = 8, size: int = 512) -> str:
    """Draw every face in UV space, filled by the checker cell of its centroid.

    ``uv`` should already be normalized to the unit square.  A face whose
    centroid falls in cell ``(floor(u*cells), floor(v*cells))`` with even
    parity is drawn light, odd parity dark.
    """
    if cells < 1:
        raise ValueError("cells must be >= 1")
    uv = np.asarray(uv, dtype=float)
    faces = np.asarray(faces)
    if not np.all(np.isfinite(uv)):
        raise ValueError("UV coordinates contain unembedded (non-finite) vertices")
    cen = uv[faces].mean(axis=1)
    cell = np.clip(np.floor(cen * cells).astype(int), 0, cells - 1)
    parity = (cell[:, 0] + cell[:, 1]) % 2

    px = uv[:, 0] * size
    py = (1.0 - uv[:, 1]) * size
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
    ]
    for f, (a, b, c) in enumerate(faces.tolist()):
        pts = " ".join(f"{px[v]:.4f},{py[v]:.4f}" for v in (a, b, c))
        fill = DARK if parity[f] else LIGHT
        out.append(f'<polygon points="{pts}" fill="{fill}" stroke="{fill}" stroke-width="0.2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
