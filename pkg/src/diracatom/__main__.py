import sys

from diracatom.cli import main

sys.exit(main())
