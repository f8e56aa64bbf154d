from unittest.mock import patch

import numpy as np
import pytest

from KerrFVR.color_scheme import ColorScheme
from KerrFVR.config import DisplayConfig
from KerrFVR.field_formatter import FieldFormatter
from KerrFVR.phase_space import Field, Grid2D
from KerrFVR.viewer import FieldViewer


@pytest.fixture
def signed_field():
    grid = Grid2D.square(3.0, 31)
    return Field.from_function(grid, lambda z: z[..., 0] * np.exp(-(z[..., 0] ** 2 + z[..., 1] ** 2)))


@pytest.fixture
def formatter():
    return FieldFormatter(ColorScheme.default())


def test_default_scheme_is_diverging():
    scheme = ColorScheme.default()
    assert scheme.n_levels == 11
    assert scheme.cmap == "RdBu_r"
    assert scheme.html_colors[5] == "background-color: #f7f7f7;"


def test_scheme_needs_odd_matching_levels():
    with pytest.raises(ValueError):
        ColorScheme(["a", "b"], "", ["x", "y"])
    with pytest.raises(ValueError):
        ColorScheme(["a", "b", "c"], "", ["x"])


def test_level_index_symmetric():
    scheme = ColorScheme.default()
    levels = scheme.level_index(np.array([-2.0, -1.0, 0.0, 0.6, 1.0]), vmax=1.0)
    np.testing.assert_array_equal(levels, [0, 0, 5, 8, 10])
    np.testing.assert_array_equal(scheme.level_index(np.array([3.0]), vmax=0.0), [5])


def test_format_row(formatter):
    row = formatter.format_row(np.array([-1.0, 0.0, 1.0]), vmax=1.0)
    assert row.count("\033[0m") == 3
    assert row.startswith("\033[48;2;5;48;97m  ")
    assert "\033[48;2;103;0;31m" in row


def test_format_row_html(formatter):
    row = formatter.format_row_html(np.array([0.0, 1.0]), vmax=1.0)
    assert row == ('<span style="background-color: #f7f7f7;">&nbsp;&nbsp;</span>'
                   '<span style="background-color: #67001f;">&nbsp;&nbsp;</span>')


def test_downsample():
    values = np.arange(100).reshape(10, 10)
    small = FieldFormatter.downsample(values, 3, 4)
    assert small.shape == (3, 4)
    assert small[0, 0] == 0 and small[-1, -1] == 99
    assert FieldFormatter.downsample(values, 0, 20).shape == (10, 10)


def test_display_terminal(signed_field, capsys):
    FieldViewer.display_field(signed_field, nrows=5, ncols=7, as_html=False, title="demo")
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "demo"
    assert len(lines) == 7
    assert lines[1].count("\033[0m") == 7
    assert lines[-1].startswith("q in [-3, 3], p in [-3, 3]")


def test_display_terminal_without_axes(signed_field, capsys):
    FieldViewer.display_field(signed_field, DisplayConfig(nrows=4, show_axes=False, as_html=False))
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_display_notebook(signed_field):
    with patch("KerrFVR.viewer.display") as mock_display:
        FieldViewer.display_field(signed_field, as_html=True, nrows=3)
    mock_display.assert_called_once()
    html = mock_display.call_args[0][0].data
    assert html.count("<div class='field-row'>") == 4


def test_not_a_notebook():
    assert FieldViewer()._check_notebook() is False


def test_get_field_html(signed_field):
    html = FieldViewer.get_field_html(signed_field, nrows=6, ncols=6, container_height="200px")
    assert 'class="field-container"' in html
    assert "max-height: 200px" in html
    assert html.count("&nbsp;&nbsp;") == 36


def test_complex_field_shows_real_part():
    grid = Grid2D.square(1.0, 3)
    field = Field(grid, np.full(grid.shape, 1.0 + 5.0j))
    html = FieldViewer.get_field_html(field, show_axes=True)
    assert "color scale +-1" in html


def test_invalid_options(signed_field):
    with pytest.raises(ValueError, match="Unknown configuration parameter: colour"):
        FieldViewer.get_field_html(signed_field, colour="red")
    with pytest.raises(ValueError, match="columns"):
        FieldViewer.get_field_html(signed_field, ncols=-1)
    with pytest.raises(ValueError, match="Color scale"):
        FieldViewer.display_field(signed_field, vmax=-1.0)


def test_render_heatmap(signed_field, tmp_path):
    path = FieldViewer.render_heatmap(signed_field, tmp_path / "field.png", show_hbar_square=True,
                                      title="t = pi/8", dpi=50)
    assert path.exists()
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_render_heatmap_positive_field(tmp_path):
    """No zero contour is drawn when the field has a single sign"""
    grid = Grid2D.square(2.0, 21)
    field = Field.from_function(grid, lambda z: np.exp(-(z[..., 0] ** 2 + z[..., 1] ** 2)))
    path = FieldViewer.render_heatmap(field, tmp_path / "positive.png", DisplayConfig(show_axes=False, dpi=40))
    assert path.stat().st_size > 0
