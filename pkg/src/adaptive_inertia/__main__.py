import sys

from .xplab.cli import main

sys.exit(main())
