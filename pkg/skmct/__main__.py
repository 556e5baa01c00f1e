# SPDX-License-Identifier: BSD-3-Clause
import sys

from .cli.main import main

sys.exit(main())
