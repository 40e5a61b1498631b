"""``python -m couplingdirac`` delegates to the command line interface."""

from .cli import main

main()
