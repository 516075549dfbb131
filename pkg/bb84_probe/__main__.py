"""Allow running as python -m bb84_probe."""

from .cli import main

if __name__ == "__main__":
    main()
