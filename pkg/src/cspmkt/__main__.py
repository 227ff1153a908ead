import sys

from cspmkt.cli import main

sys.exit(main())
