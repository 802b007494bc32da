import sys

from stylolink.cli import main

sys.exit(main())
