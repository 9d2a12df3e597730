# api/main.py
from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI

import quiet
from api.routes import router
from service.gate import init_gate, reset_gate
from service.settings import ServiceSettings

TAGS_METADATA = [
    {
        "name": "system",
        "description": "Health and runtime status endpoints.",
    },
    {
        "name": "invariants",
        "description": "Homology and Alexander polynomial of a presentation.",
    },
    {
        "name": "pipeline",
        "description": "Presentation → representations → translation extension locus → orderable slopes.",
    },
]


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    """
    Create and configure the FastAPI application.
    """
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        """
        Read the settings and create the admission gate once at startup.
        """
        s = settings or ServiceSettings()
        app.state.settings = s
        quiet.apply_library_quiet_logging()
        init_gate(job_slots=s.job_slots)
        yield
        reset_gate()

    app = FastAPI(
        title="elocus",
        version="0.3.0",
        lifespan=lifespan,
        description=(
            "Compute translation extension loci of knot manifolds from a group "
            "presentation and report the Dehn filling slopes they prove orderable. "
            "Single-job admission guard on the CPU worker pool."
        ),
        openapi_tags=TAGS_METADATA,
        docs_url="/docs",
        redoc_url="/redoc",
        swagger_ui_parameters={
            "defaultModelsExpandDepth": -1,   # hide schemas by default
            "displayRequestDuration": True,
        },
    )
    app.include_router(router, prefix="/v1")
    return app


app = create_app()
