from aebsim.cli import main

raise SystemExit(main())
