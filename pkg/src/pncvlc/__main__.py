import sys

from pncvlc.cli import main

sys.exit(main())
