import sys

from copl.cli import main

sys.exit(main())
