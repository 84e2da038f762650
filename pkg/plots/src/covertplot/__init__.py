from .render import FigureSpec, build_figure, load_groups, render

__all__ = ["FigureSpec", "build_figure", "load_groups", "render"]
__version__ = "0.1.0"
