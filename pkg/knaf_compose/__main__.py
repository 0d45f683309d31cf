#!/usr/bin/env python3
"""Entry point for running knaf-compose as a module: python -m knaf_compose"""

from .cli import main


if __name__ == "__main__":
    raise SystemExit(main())
