"""Figure rendering for linksched CSV outputs."""

from linksched_figures.render import FigureSpec, render, main
