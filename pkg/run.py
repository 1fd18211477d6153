import os
import sys

if __name__ == "__main__":
    # Make the speclab package importable when launched from any directory.
    project_root = os.path.dirname(os.path.abspath(__file__))
    sys.path.insert(0, project_root)

    from speclab.main import main

    sys.exit(main())
