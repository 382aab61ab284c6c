import sys

from stagesurv.cli import main

sys.exit(main())
