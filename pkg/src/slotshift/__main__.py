from __future__ import annotations

import sys

from slotshift.cli import main

sys.exit(main())
