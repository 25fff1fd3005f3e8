import sys

from chemowave.cli import main

sys.exit(main())
