import sys

from tlforge.cli import main

if __name__ == "__main__":
    sys.exit(main())
