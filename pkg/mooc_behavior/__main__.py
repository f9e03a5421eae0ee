"""Allow running as: python -m mooc_behavior."""

from .cli import main

main()
