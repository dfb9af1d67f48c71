from __future__ import annotations

from mmabtk.harness.cli import main

raise SystemExit(main())
