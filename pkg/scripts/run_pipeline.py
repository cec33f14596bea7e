#!/usr/bin/env python3
"""
Feature-Network Self-Similarity Toolkit - Entry Point

This is the main entry point for every workflow:
    python scripts/run_pipeline.py <subcommand> [options]
Defaults live in src/config.py; TOML files under config/ override them.
"""

import sys
import os

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))

from src.cli import cli_dispatch


def main():
    """Main entry point for the pipeline."""
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
