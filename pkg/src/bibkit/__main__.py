"""
Main entry point for the bibkit package.
Allows running with: python -m bibkit
"""

from bibkit.cli import main

if __name__ == "__main__":
    main()
