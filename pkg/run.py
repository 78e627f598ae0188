#!/usr/bin/env python3
"""
Moment-SOS Toolkit - Command Line Entry Point
"""
import sys

from momentsos import main

if __name__ == '__main__':
    sys.exit(main())
