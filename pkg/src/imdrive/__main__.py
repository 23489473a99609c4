import sys

from imdrive.cli import main

sys.exit(main())
