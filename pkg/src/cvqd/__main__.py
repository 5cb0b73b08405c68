"""Entry point for ``python -m cvqd``."""

from cvqd.cli import main

if __name__ == "__main__":
    main()
