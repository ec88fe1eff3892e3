from pydantic import BaseSettings


class Settings(BaseSettings):
    # Logging
    log_level: str = "INFO"

    # Semantics / metrics defaults
    default_metric: str = "l2"
    cosine_tolerance: float = 1e-12
    oracle_max_window: int = 12
    oracle_max_depth: int = 6

    # Planner
    planner_workers: int = 1

    # Where the CLI drops reports and CSVs when no path is given
    output_dir: str = "runs"

    class Config:
        env_file = ".env"
        env_prefix = "ETL_"
        case_sensitive = False


settings = Settings()


def get_settings() -> Settings:
    return settings


title = "Embedding Temporal Logic toolkit"
description = """
\nMonitoring, scoring and planning against ETL specifications over embedding traces\n
"""
tags_metadata = [
    {
        "name": "Monitor",
        "description": "Boolean and quantitative satisfaction of a specification over a trace",
    },
    {
        "name": "Heatmaps",
        "description": "Pairwise embedding distance matrices",
    },
    {
        "name": "Experiments",
        "description": "Desk-scale planning experiments on the point-mass world",
    },
]
