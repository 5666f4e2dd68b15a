import sys

from openqe.cli import main

sys.exit(main())
