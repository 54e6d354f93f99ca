"""Main entry point for entrolab.

This module provides a simple entry point that delegates to the package's
main function. For direct execution, use:
    python main.py run problems/shift_entropy.json

Or run as a module:
    python -m entrolab selftest

Or use the installed CLI command:
    entrolab run problems/shift_entropy.json
"""

from entrolab import main

if __name__ == "__main__":
    main()
