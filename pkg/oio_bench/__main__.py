import sys

from oio_bench.cli.main import main

sys.exit(main())
