import sys

from funcobs.cli import main

sys.exit(main())
