import sys

from freefield.cli import main

sys.exit(main())
