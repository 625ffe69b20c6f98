"""HTTP service layer: pydantic request/response models, stage handlers, FastAPI app."""
