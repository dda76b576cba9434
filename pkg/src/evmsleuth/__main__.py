"""Module entry point so `python -m evmsleuth` behaves like the CLI."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
