import sys

from fcswork.cli import main

sys.exit(main())
