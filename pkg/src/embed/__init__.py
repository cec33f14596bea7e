"""
Two-dimensional views of feature networks: classical MDS and SVG output.
"""

from src.embed.mds import Embedding2D, classical_mds, torgerson, write_coordinates_csv
from src.embed.svg import line_chart_svg, scatter_svg

__all__ = [
    "Embedding2D",
    "classical_mds",
    "line_chart_svg",
    "scatter_svg",
    "torgerson",
    "write_coordinates_csv",
]
