__version__ = "0.1.0"

from .figures import FigureSpec, render_cdf, render_trace

__all__ = ["FigureSpec", "render_cdf", "render_trace", "__version__"]
