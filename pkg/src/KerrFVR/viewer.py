import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from IPython.display import HTML, display
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .color_scheme import ColorScheme
from .config import DisplayConfig
from .field_formatter import FieldFormatter
from .phase_space import Field, Grid2D

logger = logging.getLogger(__name__)


class FieldViewer:
    def __init__(self, color_scheme: Optional[ColorScheme] = None):
        self.color_scheme = color_scheme or ColorScheme.default()
        self.formatter = FieldFormatter(self.color_scheme)

    @staticmethod
    def _prepare_field(field: Field, config: Optional[DisplayConfig] = None,
                       **kwargs) -> Tuple[np.ndarray, DisplayConfig, float]:
        """Shared preparation logic for field display"""
        base_config = config or DisplayConfig()

        for key, value in kwargs.items():
            if hasattr(base_config, key):
                setattr(base_config, key, value)
            else:
                raise ValueError(f"Unknown configuration parameter: {key} \nPossible values are: {', '.join(base_config.__dict__.keys())}")

        base_config.validate()

        values = field.values.real if field.is_complex else field.values
        vmax = base_config.vmax or float(np.max(np.abs(values)))
        return values, base_config, vmax

    @staticmethod
    def display_field(field: Field, config: Optional[DisplayConfig] = None, **kwargs) -> None:
        """Display a field as a colored block image in a notebook or terminal"""
        viewer = FieldViewer()
        values, base_config, vmax = FieldViewer._prepare_field(field, config, **kwargs)

        as_html = (base_config.as_html if base_config.as_html is not None
                   else viewer._check_notebook())

        if as_html:
            viewer._display_notebook(field.grid, values, base_config, vmax)
        else:
            viewer._display_terminal(field.grid, values, base_config, vmax)

    @staticmethod
    def get_field_html(field: Field, config: Optional[DisplayConfig] = None, **kwargs) -> str:
        """Generate raw HTML for a colored field that can be embedded in other platforms"""
        viewer = FieldViewer()
        values, base_config, vmax = FieldViewer._prepare_field(field, config, **kwargs)
        return viewer._generate_html(field.grid, values, base_config, vmax)

    @staticmethod
    def render_heatmap(field: Field, path: Union[str, Path], config: Optional[DisplayConfig] = None,
                       **kwargs) -> Path:
        """Write a PNG density plot on a symmetric diverging scale centered at zero"""
        viewer = FieldViewer()
        values, base_config, vmax = FieldViewer._prepare_field(field, config, **kwargs)
        grid = field.grid

        fig = Figure(figsize=(base_config.figsize * 1.2, base_config.figsize))
        ax = fig.add_subplot()
        image = ax.imshow(values, extent=grid.extent, origin="upper", aspect="equal",
                          interpolation="nearest", cmap=viewer.color_scheme.cmap,
                          vmin=-vmax, vmax=vmax)
        fig.colorbar(image, ax=ax)

        if base_config.show_contours and np.any(values > 0) and np.any(values < 0):
            ax.contour(grid.q_axis, grid.p_axis[::-1], values[::-1], levels=[0.0],
                       colors="k", linewidths=0.7)

        if base_config.show_hbar_square:
            # unit area is hbar in these units
            margin = 0.05 * (grid.q_max - grid.q_min)
            ax.add_patch(Rectangle((grid.q_min + margin, grid.p_min + margin), 1.0, 1.0,
                                   facecolor="0.5", edgecolor="none", alpha=0.8))

        if base_config.show_axes:
            ax.set_xlabel("q")
            ax.set_ylabel("p")
        else:
            ax.set_axis_off()
        if base_config.title:
            ax.set_title(base_config.title)

        path = Path(path)
        fig.savefig(path, dpi=base_config.dpi, bbox_inches="tight")
        logger.info("Wrote heatmap %s", path)
        return path

    def _check_notebook(self) -> bool:
        """Check if we're running in a Jupyter notebook"""
        try:
            shell = get_ipython().__class__.__name__
            if shell == 'ZMQInteractiveShell':
                return True
            return False
        except NameError:
            return False

    def _generate_html(self, grid: Grid2D, values: np.ndarray, config: DisplayConfig, vmax: float) -> str:
        """Generate raw HTML for a field (shared by notebook display and external use)"""
        html_parts = [f"""
        <style>
            .field-container {{
                font-family: monospace;
                white-space: pre;
                overflow: auto;
                max-height: {config.container_height};
                background-color: white;
                padding: 10px;
                border: 1px solid #ddd;
            }}
            .field-row {{
                line-height: 1;
                margin: 0;
            }}
        </style>
        """, '<div class="field-container">']

        if config.title:
            html_parts.append(f"<div class='field-row'>{config.title}</div>")

        for row in self.formatter.downsample(values, config.nrows, config.ncols):
            html_parts.append(f"<div class='field-row'>{self.formatter.format_row_html(row, vmax)}</div>")

        if config.show_axes:
            html_parts.append(f"<div class='field-row'>{self._create_axis_labels(grid, vmax)}</div>")

        html_parts.append('</div>')
        return ''.join(html_parts)

    def _display_notebook(self, grid: Grid2D, values: np.ndarray, config: DisplayConfig, vmax: float) -> None:
        """Display a field in a notebook with a scrollable container"""
        display(HTML(self._generate_html(grid, values, config, vmax)))

    def _display_terminal(self, grid: Grid2D, values: np.ndarray, config: DisplayConfig, vmax: float) -> None:
        """Display a field in the terminal"""
        if config.title:
            print(config.title)
        for row in self.formatter.downsample(values, config.nrows, config.ncols):
            print(self.formatter.format_row(row, vmax))
        if config.show_axes:
            print(self._create_axis_labels(grid, vmax))

    def _create_axis_labels(self, grid: Grid2D, vmax: float) -> str:
        """Extents and color scale of the displayed field"""
        return (f"q in [{grid.q_min:g}, {grid.q_max:g}], p in [{grid.p_min:g}, {grid.p_max:g}], "
                f"color scale +-{vmax:.3g}")
