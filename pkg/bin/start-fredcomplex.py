#!/usr/bin/env python3

"""
Starting the numerical experiments on Fredholm complexes
FREDCOMPLEX.

Help:
    ./bin/start-fredcomplex.py list
    ./bin/start-fredcomplex.py demo circle-index --k 3
    ./bin/start-fredcomplex.py run tests/config_files/hodge.ini
"""

import sys
from start import start_fredcomplex

if __name__ == "__main__":
    start_fredcomplex()
else:
    sys.exit("Can be run only as standalone program.")
