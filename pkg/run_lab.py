#!/usr/bin/env python3
"""Script to run a lab experiment from the project root."""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
