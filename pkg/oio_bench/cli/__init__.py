"""Command-line surface."""
from .main import build_parser, load_config, main

__all__ = ["build_parser", "load_config", "main"]
