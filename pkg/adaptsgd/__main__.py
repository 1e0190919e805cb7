import sys

from adaptsgd.cli import main

sys.exit(main())
