import sys

from vlex_multipliers.cli.main import main

sys.exit(main())
