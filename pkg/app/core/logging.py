from loguru import logger
import sys

from app.core.config import settings

# Configure logger
logger.remove()  # Remove default handler
logger.add(sys.stderr, format="{time} | {level} | {message}", level=settings.log_level)
if settings.log_file:
    logger.add(settings.log_file, rotation="10 MB", retention="1 week", level=settings.log_level)

# Export logger
__all__ = ["logger"]
