import sys

from gbnlearn.cli import main

sys.exit(main())
