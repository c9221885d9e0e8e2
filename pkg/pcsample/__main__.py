import sys

from pcsample.cli import main

sys.exit(main())
