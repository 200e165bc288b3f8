"""Allow ``python -m channel_lab``."""

from channel_lab.main import main

raise SystemExit(main())
