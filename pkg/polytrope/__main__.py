"""Allow `python -m polytrope <command> ...`."""

import sys

from polytrope.cli import main

sys.exit(main())
