from typing import List, Tuple

import numpy as np

# RdBu_r sampled at eleven levels: blue for negative values, white at zero, red for positive
_DIVERGING = [
    (5, 48, 97), (33, 102, 172), (67, 147, 195), (146, 197, 222), (209, 229, 240),
    (247, 247, 247),
    (253, 219, 199), (244, 165, 130), (214, 96, 77), (178, 24, 43), (103, 0, 31),
]


class ColorScheme:
    """Diverging color configuration for signed phase-space fields"""
    def __init__(self, levels: List[str], reset: str, html_colors: List[str], cmap: str = "RdBu_r"):
        if len(levels) != len(html_colors) or len(levels) % 2 == 0:
            raise ValueError("A diverging scheme needs the same odd number of terminal and HTML levels.")
        self.levels = levels
        self.reset = reset
        self.html_colors = html_colors
        self.cmap = cmap

    @classmethod
    def default(cls) -> 'ColorScheme':
        return cls.from_rgb(_DIVERGING, cmap="RdBu_r")

    @classmethod
    def from_rgb(cls, rgb: List[Tuple[int, int, int]], cmap: str = "RdBu_r") -> 'ColorScheme':
        return cls(
            levels=[f'\033[48;2;{r};{g};{b}m' for r, g, b in rgb],
            reset='\033[0m',
            html_colors=[f'background-color: #{r:02x}{g:02x}{b:02x};' for r, g, b in rgb],
            cmap=cmap,
        )

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def level_index(self, values: np.ndarray, vmax: float) -> np.ndarray:
        """Level of each value on a scale symmetric about zero; zero maps to the middle level"""
        half = self.n_levels // 2
        if vmax <= 0:
            return np.full(np.shape(values), half, dtype=int)
        scaled = np.clip(np.asarray(values, dtype=float) / vmax, -1.0, 1.0)
        return (half + np.rint(scaled * half)).astype(int)
