import sys

from cocycle_lab.main import main

if __name__ == "__main__":
    sys.exit(main())
