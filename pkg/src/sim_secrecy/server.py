"""FastMCP experiment server with lifespan-managed run registry."""

from __future__ import annotations

import asyncio
import logging
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import AsyncIterator

from fastmcp import FastMCP
from starlette.requests import Request
from starlette.responses import JSONResponse, Response

from .config import Settings, configure_logging, settings
from .core.run_manager import RunManager, RunSweeper
from .tools import create_tool_router, import_all_tools

configure_logging(settings.log_level)
logger = logging.getLogger(__name__)


@dataclass
class AppContext:
    """Lifespan context shared by all tools."""

    run_manager: RunManager
    settings: Settings


@asynccontextmanager
async def app_lifespan(server: FastMCP) -> AsyncIterator[AppContext]:
    """Create the run registry and its sweeper; abandon unfinished runs on shutdown."""
    logger.info(f"Starting SIM secrecy experiment server (output: {settings.output_path})")

    run_manager = RunManager(
        max_concurrent_runs=settings.max_concurrent_runs,
        retention_seconds=settings.run_retention_seconds,
    )
    sweeper = RunSweeper(run_manager, interval_seconds=settings.sweep_interval_seconds)
    await sweeper.start()

    try:
        yield AppContext(run_manager=run_manager, settings=settings)
    finally:
        logger.info("Shutting down experiment server...")
        await sweeper.stop()
        abandoned = await run_manager.shutdown()
        logger.info(f"Shutdown complete ({abandoned} runs abandoned)")


def create_server() -> FastMCP:
    """Create the server; tools are imported asynchronously in setup_server."""
    return FastMCP(
        name="sim-secrecy",
        instructions=(
            "Simulator and PPO-BOP trainer for SIM-assisted secure uplinks. "
            "run_baseline returns results directly; run_sweep and start_training "
            "return a run_id to poll with get_run."
        ),
        lifespan=app_lifespan,
    )


async def setup_server(mcp: FastMCP) -> None:
    tool_router = create_tool_router()
    await import_all_tools(tool_router)
    await mcp.import_server(tool_router)


mcp = create_server()


@mcp.custom_route("/health", methods=["GET"])
async def health_check(request: Request) -> Response:
    return JSONResponse({"status": "ok"})


def run_server() -> None:
    """Run the MCP server over HTTP."""
    asyncio.run(setup_server(mcp))
    mcp.run(transport="http", host=settings.host, port=settings.port)
