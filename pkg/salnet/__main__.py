import sys

from salnet.cli import main

sys.exit(main())
