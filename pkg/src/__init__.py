"""
takagi-lab

Library logging stays off until an entry point enables it (the CLI does).
"""

from loguru import logger

logger.disable("src")
