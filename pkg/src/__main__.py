from src.controllers.cli_controller import main

raise SystemExit(main())
