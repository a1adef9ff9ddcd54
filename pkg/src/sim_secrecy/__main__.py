"""Entry point for the sim-secrecy command line."""

import sys


def main() -> int:
    """Main entry point."""
    from .harness.cli import main as cli_main

    try:
        return cli_main()
    except KeyboardInterrupt:
        print("\nShutdown requested...")
        return 0


if __name__ == "__main__":
    sys.exit(main())
