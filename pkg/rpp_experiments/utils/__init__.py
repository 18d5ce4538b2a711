"""Command-line helpers."""

from .cli import build_parser, parse_arguments, show_cache_help, show_examples

__all__ = ["build_parser", "parse_arguments", "show_cache_help", "show_examples"]
