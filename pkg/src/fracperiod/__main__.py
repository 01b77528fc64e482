import sys

from fracperiod.cli import main

sys.exit(main())
