import sys

from .clibench.cli import main

sys.exit(main())
