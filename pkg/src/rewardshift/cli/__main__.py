import sys

from rewardshift.cli.main import main

sys.exit(main())
