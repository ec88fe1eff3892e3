from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import RedirectResponse

from .config import description, tags_metadata, title
from .routers import experiments, heatmaps, monitor

app = FastAPI(
    title=title,
    description=description,
    version="1.0.0",
    openapi_tags=tags_metadata,
    docs_url="/api/docs",
    redoc_url="/api/redoc",
    openapi_url="/api/openapi.json"
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# API routes
app.include_router(monitor.router, prefix="/api")
app.include_router(heatmaps.router, prefix="/api")
app.include_router(experiments.router, prefix="/api")


@app.get("/")
def index_redirect():
    return RedirectResponse(url="/api/docs", status_code=307)


@app.get("/api/health")
def health():
    return {"status": "ok"}
