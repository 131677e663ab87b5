from kgqc.cli.main import main

raise SystemExit(main())
