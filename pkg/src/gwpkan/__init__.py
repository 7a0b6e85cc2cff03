"""gwpkan: process-informed GWP regression with spline-edge networks and
symbolic formula extraction."""

__version__ = "0.1.0"
