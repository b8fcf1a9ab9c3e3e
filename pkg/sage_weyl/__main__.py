from sage_weyl.cli import main

raise SystemExit(main())
