"""Marriage Market Stability - Main Package"""

__version__ = "0.1.0"
