"""FastAPI service wrapping the synthesis engine.

The service is stateless: every request carries the workspace (and
optionally the catalog) as file content, so multiple clients can share one
instance without coordination.  The CLI is a thin client of this API.
"""

from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, artifacts
from ..catalog import default_catalog, parse_catalog
from ..dynamics import compile_robot
from ..errors import ArmsynthError
from ..grammar import ConfigWord
from ..planner import Path, PathSpec, check_path, plan
from ..robustness import (LP_TOL, evaluate_configuration, nominal_targets,
                          robustness, validate_trajectory)
from ..synthesis import (DesignResult, Limits, SynthesisParams,
                         correct_by_construction)
from ..workspace import abstract, parse_workspace
from . import schemas


def _load(workspace_text: str, catalog_text: str | None):
    catalog = parse_catalog(catalog_text) if catalog_text else default_catalog()
    return catalog, parse_workspace(workspace_text)


def _limits(o: schemas.SynthesisOptions) -> Limits:
    return Limits(max_links=o.max_links, gp_budget=o.gp_budget, k_max=o.kmax,
                  wall_clock=o.wall_clock,
                  max_paths_per_structure=o.paths_per_structure)


def _params(o: schemas.SynthesisOptions) -> SynthesisParams:
    return SynthesisParams(u_bound=o.ubound, eps=o.epsilon, dt=o.dt,
                           grid_h=o.grid, seed=o.seed, trust=o.trust,
                           grid_per_dim=o.grid_per_dim)


def _rho_fields(rho: float) -> tuple[float | None, str]:
    if np.isfinite(rho):
        return float(rho + 0.0), artifacts.fmt(rho)
    return None, artifacts.fmt(rho)


def _bundle(design: DesignResult, workspace, options: schemas.SynthesisOptions,
            aw) -> tuple[schemas.DesignDoc, schemas.ArtifactBundle]:
    opts = options.model_dump()
    doc_text = artifacts.design_document(str(design.word), design.lengths,
                                         design.rho, design.path,
                                         design.control, opts)
    doc = schemas.DesignDoc(word=str(design.word),
                            lengths=[float(v) for v in design.lengths],
                            rho=float(design.rho + 0.0),
                            path=list(design.path),
                            control=[[float(v) for v in row] for row in
                                     np.atleast_2d(design.control)]
                            if np.asarray(design.control).size else [],
                            options=opts)
    report = artifacts.report_text("success", str(design.word), design.lengths,
                                   design.rho, len(design.path), opts)
    bundle = schemas.ArtifactBundle(
        report=report,
        design=doc_text,
        trajectory_csv=artifacts.trajectory_csv(design.poses, design.control,
                                                options.dt),
        history_csv=artifacts.history_csv(design.log, options.max_links),
        svg=artifacts.workspace_svg(workspace, aw, design.path,
                                    design.positions),
        log_jsonl="".join(json.dumps(e, sort_keys=True) + "\n" for e in design.log),
    )
    return doc, bundle


def create_app() -> FastAPI:
    app = FastAPI(title="armsynth",
                  description="certified synthesis of reconfigurable planar arms",
                  version=__version__)

    @app.exception_handler(ArmsynthError)
    async def domain_error(_request: Request, exc: ArmsynthError):
        return JSONResponse(status_code=422,
                            content={"code": exc.code, "detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/synthesize", response_model=schemas.SynthesizeResponse)
    def synthesize(req: schemas.SynthesizeRequest) -> schemas.SynthesizeResponse:
        catalog, workspace = _load(req.workspace, req.catalog)
        result = correct_by_construction(catalog, workspace,
                                         _limits(req.options),
                                         _params(req.options))
        if isinstance(result, DesignResult):
            aw = abstract(workspace, req.options.grid)
            doc, bundle = _bundle(result, workspace, req.options, aw)
            return schemas.SynthesizeResponse(status="success", design=doc,
                                              artifacts=bundle, log=result.log)
        report = artifacts.report_text("unsynthesizable", None, (), 0.0, None,
                                       req.options.model_dump())
        bundle = schemas.ArtifactBundle(
            report=report, design="", trajectory_csv="", history_csv=artifacts.history_csv(result.log, req.options.max_links),
            svg=artifacts.workspace_svg(workspace),
            log_jsonl="".join(json.dumps(e, sort_keys=True) + "\n" for e in result.log))
        return schemas.SynthesizeResponse(status="unsynthesizable",
                                          reason=result.reason,
                                          artifacts=bundle, log=result.log)

    @app.post("/check", response_model=schemas.CheckResponse)
    def check(req: schemas.CheckRequest) -> schemas.CheckResponse:
        catalog, workspace = _load(req.workspace, req.catalog)
        opts = req.design.options
        ubound = req.ubound if req.ubound is not None else float(opts["ubound"])
        aw = abstract(workspace, float(opts["grid"]))
        word = ConfigWord.parse(req.design.word)
        path = Path(tuple(req.design.path))
        control = (np.asarray(req.design.control, dtype=float)
                   if req.design.control else np.zeros((0, len(req.design.lengths))))
        try:
            check_path(aw, PathSpec(start_cell=path.cells[0],
                                    k_max=max(1, path.horizon)), path)
            targets = nominal_targets(req.design.lengths, aw, path)
            model = compile_robot(word, req.design.lengths, targets,
                                  dt=float(opts["dt"]), catalog=catalog)
        except ArmsynthError as exc:
            return schemas.CheckResponse(ok=False, rho=None, rho_text="-inf",
                                         reason=f"{exc.code}: {exc}")
        verdict = validate_trajectory(model, req.design.lengths, control,
                                      workspace, path)
        res = robustness(model, aw, path, ubound, float(opts["epsilon"]),
                         float(opts["trust"]))
        rho, rho_text = _rho_fields(res.rho)
        budget_ok = control.size == 0 or float(np.abs(control).max()) <= ubound + LP_TOL
        ok = verdict.valid and res.rho >= -LP_TOL and budget_ok
        return schemas.CheckResponse(ok=ok, rho=rho, rho_text=rho_text,
                                     violation_step=verdict.violation_step,
                                     reason=verdict.reason)

    @app.post("/robustness", response_model=schemas.RobustnessResponse)
    def robustness_endpoint(req: schemas.RobustnessRequest) -> schemas.RobustnessResponse:
        catalog, workspace = _load(req.workspace, req.catalog)
        aw = abstract(workspace, req.options.grid)
        if req.path is None:
            spec = PathSpec(start_cell=aw.start_cell, k_max=req.options.kmax)
            path = plan(aw, spec)
            if path is None:
                return schemas.RobustnessResponse(rho=None, rho_text="-inf",
                                                  status="no-path", path=[])
        else:
            path = Path(tuple(req.path))
        res = evaluate_configuration(ConfigWord.parse(req.word), req.lengths,
                                     aw, path, req.options.ubound,
                                     req.options.epsilon, req.options.dt,
                                     req.options.trust, catalog)
        rho, rho_text = _rho_fields(res.rho)
        return schemas.RobustnessResponse(rho=rho, rho_text=rho_text,
                                          status=res.status,
                                          path=[int(c) for c in path.cells])

    @app.post("/plan", response_model=schemas.PlanResponse)
    def plan_endpoint(req: schemas.PlanRequest) -> schemas.PlanResponse:
        from ..planner import BlockingClause

        _catalog, workspace = _load(req.workspace, None)
        aw = abstract(workspace, req.options.grid)
        spec = PathSpec(start_cell=aw.start_cell, k_max=req.options.kmax)
        blocked = [BlockingClause(tuple(enumerate(cells))) for cells in req.blocked]
        path = plan(aw, spec, blocked)
        if path is None:
            return schemas.PlanResponse(feasible=False, cells_total=aw.n_cells)
        return schemas.PlanResponse(
            feasible=True, path=[int(c) for c in path.cells],
            centers=[[float(v) for v in aw.cell_center(c)] for c in path.cells],
            cells_total=aw.n_cells)

    return app


app = create_app()
