import sys

from brittle_limit import main

if __name__ == '__main__':
    sys.exit(main())
