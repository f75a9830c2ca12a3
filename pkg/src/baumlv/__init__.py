"""baumlv: verification toolkit for artifact-centric BAUML process models."""

__version__ = "0.1.0"
