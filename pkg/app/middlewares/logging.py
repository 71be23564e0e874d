import time
from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware
from app.core.logging import logger


class LoggingMiddleware(BaseHTTPMiddleware):
    async def dispatch(self, request: Request, call_next):
        start_time = time.time()

        # Uploads can be large; log the size rather than the payload
        length = request.headers.get("content-length")
        if length:
            logger.info(f"Request: {request.method} {request.url} - {length} bytes")
        else:
            logger.info(f"Request: {request.method} {request.url}")

        response = await call_next(request)

        process_time = time.time() - start_time
        logger.info(f"Response: {response.status_code} - Time: {process_time:.2f}s")

        return response
