import sys

from .app import main

# Permite ejecutar la CLI con 'python -m src.cli.main'
if __name__ == "__main__":
    sys.exit(main())
