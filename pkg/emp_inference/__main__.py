"""`python -m emp_inference`."""

from .cli import main

raise SystemExit(main())
