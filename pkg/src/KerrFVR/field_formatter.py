import numpy as np

from .color_scheme import ColorScheme


class FieldFormatter:
    """Handles field row formatting and coloring"""

    def __init__(self, color_scheme: ColorScheme):
        self.colors = color_scheme

    def _format_row_base(self, values: np.ndarray, vmax: float, html: bool = False,
                         cell: str = '  ') -> str:
        formatted = []
        for level in self.colors.level_index(values, vmax):
            if html:
                formatted.append(f'<span style="{self.colors.html_colors[level]}">{cell}</span>')
                continue
            formatted.append(f"{self.colors.levels[level]}{cell}{self.colors.reset}")
        return ''.join(formatted)

    def format_row(self, values: np.ndarray, vmax: float) -> str:
        return self._format_row_base(values, vmax, html=False)

    def format_row_html(self, values: np.ndarray, vmax: float) -> str:
        return self._format_row_base(values, vmax, html=True, cell='&nbsp;&nbsp;')

    @staticmethod
    def downsample(values: np.ndarray, nrows: int, ncols: int) -> np.ndarray:
        """Pick evenly spaced rows and columns; 0 keeps every sample on that axis"""
        rows = np.arange(values.shape[0]) if nrows == 0 or nrows >= values.shape[0] else \
            np.linspace(0, values.shape[0] - 1, nrows).round().astype(int)
        cols = np.arange(values.shape[1]) if ncols == 0 or ncols >= values.shape[1] else \
            np.linspace(0, values.shape[1] - 1, ncols).round().astype(int)
        return values[np.ix_(rows, cols)]
