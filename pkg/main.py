"""
FastAPI service over the rendezvous orchestrator
Same workers as the command line: predict, solve, validate, plus run listing
"""
from dataclasses import replace
from typing import Any, Dict, List, Optional
import json
import logging

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from artifact_store import ArtifactStore
from orchestrator import RendezvousOrchestrator
from rendezvous import __version__
from rendezvous.errors import RendezvousError
from rendezvous.scenarios import PRESETS, Scenario, get_preset, load_scenario
from rendezvous.settings import configure_logging, get_settings

configure_logging()
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="UAV-UGV Rendezvous Trajectory Service",
    description="Closed-form rendezvous guidance, trajectory optimization and model validation",
    version=__version__,
)

store = ArtifactStore(get_settings().output_dir)
orchestrator = RendezvousOrchestrator(store)


# Pydantic models for API
class ScenarioRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str = "straight"
    config: Optional[Dict[str, Any]] = None
    k_aggr: Optional[float] = None


class PredictRequest(ScenarioRequest):
    k_values: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])


class SolveRequest(ScenarioRequest):
    max_newton: Optional[int] = None
    grad_tol: Optional[float] = None
    step: Optional[float] = None
    seed: Optional[int] = None
    strict: bool = False


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fd_tol: float = 1e-5
    seed: int = 0
    suites: Optional[List[str]] = None


def build_scenario(request: ScenarioRequest) -> Scenario:
    """Preset or inline config document, with the request overrides applied"""
    try:
        if request.config is not None:
            scenario = load_scenario(json.dumps(request.config))
        else:
            scenario = get_preset(request.scenario)
        if request.k_aggr is not None:
            scenario = scenario.with_k(request.k_aggr)
        if isinstance(request, SolveRequest):
            options = scenario.options
            if request.max_newton is not None:
                options = replace(options, max_newton=request.max_newton)
            if request.grad_tol is not None:
                options = replace(options, grad_tol=request.grad_tol)
            scenario = replace(scenario, options=options,
                               step=scenario.step if request.step is None else request.step)
        scenario.spec.validate(scenario.limits)
    except (RendezvousError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    return scenario


# API Endpoints
@app.get("/api/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "message": "Rendezvous trajectory service is running", "version": __version__}


@app.get("/api/status")
async def get_system_status():
    return orchestrator.get_system_status()


@app.get("/api/scenarios")
async def get_scenarios():
    """Available presets, fully resolved"""
    return {"scenarios": {name: factory().to_dict() for name, factory in PRESETS.items()}}


@app.post("/api/predict")
async def predict(request: PredictRequest):
    """Closed-form descent angle, rendezvous space and time per k_aggr"""
    scenario = build_scenario(request)
    result = orchestrator.run_predict(scenario, request.k_values)
    if not result["success"]:
        raise HTTPException(status_code=400, detail=result["message"])
    return {"success": True, "rows": result["rows"]}


@app.post("/api/solve")
def solve(request: SolveRequest):
    """
    Run one optimization; blocks until the solver returns
    (declared sync so FastAPI runs it in its thread pool)
    """
    scenario = build_scenario(request)
    result = orchestrator.run_solve(scenario, strict=request.strict, seed=request.seed)
    if not result["success"]:
        raise HTTPException(status_code=500, detail=f"{result['message']}: {result['error']}")
    return result


@app.post("/api/validate")
def validate(request: ValidateRequest):
    result = orchestrator.run_validate(fd_tol=request.fd_tol, seed=request.seed, suites=request.suites)
    if "suites" not in result:
        raise HTTPException(status_code=400, detail=result["message"])
    return result


@app.get("/api/runs")
async def get_runs():
    """Runs stored in the output directory"""
    return {"runs": store.list_runs(), "file_info": store.get_data_file_info()}


@app.get("/api/runs/{run_name}")
async def get_run(run_name: str):
    directory = store.run_dir_if_exists(run_name)
    if directory is None:
        raise HTTPException(status_code=404, detail=f"no run named '{run_name}'")
    return {"manifest": store.load_manifest(directory), "file_info": store.get_data_file_info(directory)}


if __name__ == "__main__":
    import uvicorn

    logger.info("SUCCESS: Starting rendezvous trajectory service at http://localhost:8000")
    uvicorn.run(app, host="127.0.0.1", port=8000)
