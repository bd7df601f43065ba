import sys

from graverfold.cli import main

sys.exit(main())
