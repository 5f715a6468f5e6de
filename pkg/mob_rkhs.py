#!/usr/bin/env python3
"""
Moebius-homogeneous RKHS decomposition toolkit
Simple launcher for the command-line interface
"""

import os
import sys

if __name__ == "__main__":
    try:
        from dotenv import load_dotenv

        load_dotenv()
        sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))
        from interfaces.cli import main
    except ImportError as e:
        print("Error: Could not import the toolkit modules.")
        print("Make sure you're running from the project root directory and the requirements are installed.")
        print(f"Error details: {e}")
        sys.exit(2)

    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nInterrupted")
        sys.exit(130)
