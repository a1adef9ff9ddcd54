"""Meta and health check tools."""

from typing import Annotated, Literal, Optional

from fastmcp import Context, FastMCP
from pydantic import Field

from .. import __version__

meta_router = FastMCP(
    name="MetaTools",
    instructions="Health check and run listing tools",
)


def get_context(ctx: Context):
    """Helper to retrieve app context from lifespan."""
    return ctx.request_context.lifespan_context


@meta_router.tool(
    description="Health check - verify server is running and get server info",
    tags={"meta", "health"},
)
async def ping() -> dict:
    """
    Simple health check returning server status.

    Returns:
        Server status, version and run limits
    """
    from ..config import settings

    return {
        "status": "ok",
        "version": __version__,
        "output_dir": settings.output_dir,
        "max_concurrent_runs": settings.max_concurrent_runs,
    }


@meta_router.tool(
    description="List submitted experiment runs",
    tags={"meta", "runs"},
)
async def list_runs(
    ctx: Context,
    status: Annotated[
        Optional[Literal["pending", "running", "succeeded", "failed"]],
        Field(description="Optional filter by run status"),
    ] = None,
) -> dict:
    """
    List runs with their status, parameters and (when finished) results.

    Args:
        status: Optional status filter
    """
    app_ctx = get_context(ctx)
    runs = app_ctx.run_manager.list_runs(status=status)
    return {"runs": runs, "count": len(runs)}
