"""Main entry point for the holosim package."""

import sys

from holosim.main import main

if __name__ == "__main__":
    sys.exit(main())
