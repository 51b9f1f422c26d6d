"""HTTP service exposing the case pipeline and the review queue.

JSON endpoints: POST /cases, GET /cases/{id}, GET /queue, POST
/queue/{item_id}/resolve, GET /health, GET /metrics/summary. A static bearer
token can be required for everything except /health.
"""

from __future__ import annotations

import logging
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from pydantic import BaseModel, Field

from . import kernels
from .domain import PatientRecord, Vitals
from .errors import QueueError, ValidationError
from .pipeline import PipelineEngine, outcome_to_dict

logger = logging.getLogger(__name__)


class VitalsIn(BaseModel):
    temperature: Optional[float] = None
    spo2: Optional[float] = None
    heart_rate: Optional[float] = None
    age: Optional[float] = None
    sex: Optional[str] = None


class CaseIn(BaseModel):
    id: Optional[str] = None
    symptom_text: str = Field(min_length=1)
    vitals: Optional[VitalsIn] = None
    reference_treatment: Optional[str] = None


class ResolveIn(BaseModel):
    action: str
    label: Optional[str] = None
    plan_text: Optional[str] = None
    approved: Optional[bool] = None
    notes: Optional[str] = None
    resolver: str = Field(min_length=1)


def create_app(engine: PipelineEngine) -> FastAPI:
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="clintriage", version="0.1.0")
    # the review console is served from its own origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    token = engine.config.service.api_token

    def require_auth(authorization: Optional[str] = Header(default=None)) -> None:
        if token is None:
            return
        if authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    auth = Depends(require_auth)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "kernel_backend": kernels.backend_name(),
                "classes": len(engine.model.label_set)}

    @app.post("/cases", dependencies=[auth])
    def submit_case(case: CaseIn) -> dict:
        import uuid

        vitals_in = case.vitals or VitalsIn()
        try:
            vitals = Vitals(temperature=vitals_in.temperature,
                            spo2=vitals_in.spo2, heart_rate=vitals_in.heart_rate,
                            age=vitals_in.age, sex=vitals_in.sex)
            vitals.validate()
            record = PatientRecord(id=case.id or uuid.uuid4().hex,
                                   symptom_text=case.symptom_text,
                                   vitals=vitals)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        outcome = engine.run_case(record, reference=case.reference_treatment)
        return outcome_to_dict(outcome, engine.model.label_set)

    @app.get("/cases/{case_id}", dependencies=[auth])
    def get_case(case_id: str) -> dict:
        snapshot = engine.get_outcome(case_id)
        if snapshot is None:
            raise HTTPException(status_code=404, detail=f"unknown case {case_id!r}")
        return snapshot

    @app.get("/queue", dependencies=[auth])
    def list_queue(status: Optional[str] = Query(default=None)) -> dict:
        try:
            items = engine.queue.list_items(status)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"items": [item.to_dict() for item in items]}

    @app.post("/queue/{item_id}/resolve", dependencies=[auth])
    def resolve_item(item_id: str, body: ResolveIn) -> dict:
        resolution = {"action": body.action}
        for key in ("label", "plan_text", "approved", "notes"):
            value = getattr(body, key)
            if value is not None:
                resolution[key] = value
        try:
            item = engine.queue.resolve(item_id, resolution, body.resolver)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except QueueError as exc:
            message = str(exc)
            status = 409 if "already resolved" in message else 404
            raise HTTPException(status_code=status, detail=message) from exc
        return item.to_dict()

    @app.get("/metrics/summary", dependencies=[auth])
    def metrics_summary() -> dict:
        return engine.summary()

    return app
