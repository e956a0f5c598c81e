import sys

from emn.cli import main

sys.exit(main())
