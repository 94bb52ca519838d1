from leapstack.cli import main

raise SystemExit(main())
