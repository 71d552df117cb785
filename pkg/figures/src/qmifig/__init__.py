"""Figures from exported mutual-information and optimization archives.

This package reads only the exported file formats (the mutual-information,
run-table, and resource-grid CSVs plus the sequence JSON documents) and has
no import-time or runtime dependency on the package that produced them.
"""

__version__ = "0.1.0"
