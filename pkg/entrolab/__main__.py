"""Entry point for running entrolab as a module.

Allows running the application via: python -m entrolab
"""

from entrolab.cli import main


if __name__ == "__main__":
    main()
