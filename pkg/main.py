""" Entry point for dockmpc.

Runs the command line interface, see cli.py for the subcommands.
"""

import sys

from cli import cli_main

if __name__ == "__main__":
    cli_main(sys.argv)
