from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from app.core.config import settings
from app.core.exceptions import ShellDragError
from app.core.logging import logger
from app.middlewares.logging import LoggingMiddleware
from app.modules.calibration.routes import router as calibration_router
from app.modules.metrics.routes import router as metrics_router
from app.modules.simulator.routes import router as simulator_router
from app.modules.telemetry.routes import router as telemetry_router

app = FastAPI(
    title="ShellDrag API",
    description="""
    **ShellDrag**: drag on a shelled legged robot pushing through a channel lined with compliant beams.

    - `/simulator`: quasi-static sweep of the body through a beam channel
    - `/metrics`: drag energy and specific resistance
    - `/telemetry`: trial analysis from an uploaded telemetry CSV
    - `/calibration`: fit the shell force-sensor calibration from an uploaded dataset
    """,
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(LoggingMiddleware)

app.include_router(simulator_router, prefix="/simulator", tags=["simulator"])
app.include_router(metrics_router, prefix="/metrics", tags=["metrics"])
app.include_router(telemetry_router, prefix="/telemetry", tags=["telemetry"])
app.include_router(calibration_router, prefix="/calibration", tags=["calibration"])


@app.exception_handler(ShellDragError)
async def shelldrag_error_handler(request: Request, exc: ShellDragError):
    logger.warning(f"{request.method} {request.url.path} failed: {exc.code}: {exc.message}")
    return JSONResponse(status_code=422, content={"detail": exc.message, "code": exc.code})


@app.get("/")
def read_root():
    logger.info("Root endpoint accessed")
    return {"API": "ShellDrag is running successfully v1.0", "output_dir": settings.output_dir}


@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}
