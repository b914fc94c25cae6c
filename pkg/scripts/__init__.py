"""
Bergman projection numerics - Utility Scripts

This package contains utility scripts for:
- Running batteries of key=value experiment files through the CLI
"""
