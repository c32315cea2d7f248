"""FastAPI service wrapping the lab: one endpoint per operation, all
randomness driven by request seeds. The service holds no mutable state,
so any number of clients may run experiments concurrently."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, experiments, process
from ..graphs import (
    Graph,
    GraphError,
    classify_tree,
    iterated_split,
    load_edge_list,
    parse_graph_spec,
    save_edge_list,
    split_edge_balanced,
)
from ..oracle import (
    exact_cdf_extinction,
    exact_expected_extinction,
    exact_transient_survival,
)
from ..reporting import Constants
from . import schemas as sc


def _resolve_graph(req: sc.GraphIn) -> tuple[Graph, str | None]:
    if req.graph is not None:
        g = parse_graph_spec(req.graph, allow_file=False)
        return g, req.graph
    return load_edge_list(req.edge_list), None


def _constants(c: sc.ConstantsIn | None) -> Constants:
    if c is None:
        return Constants.default()
    vals = {k: v for k, v in c.model_dump().items() if v is not None}
    if not vals:
        return Constants.default()
    return Constants.build(provenance="user", **vals)


def _report_out(report) -> sc.ReportOut:
    return sc.ReportOut(**report.to_json_dict())


def create_app() -> FastAPI:
    app = FastAPI(
        title="contactlab",
        version=__version__,
        description="Simulation and verification lab for the contact process on finite graphs.",
    )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        # GraphError / HarrisError / CapacityError subclass ValueError
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=sc.HealthOut)
    def health():
        return sc.HealthOut(status="ok", version=__version__)

    @app.post("/v1/gen", response_model=sc.GenResponse)
    def gen(req: sc.GenRequest):
        g, _ = _resolve_graph(req)
        return sc.GenResponse(
            n_vertices=g.n_vertices,
            n_edges=g.n_edges,
            edges=list(g.edges),
            edge_list=save_edge_list(g),
        )

    @app.post("/v1/simulate", response_model=sc.SimulateResponse)
    def simulate(req: sc.SimulateRequest):
        g, _ = _resolve_graph(req)
        traj = process.run_trajectory(
            g, req.lam, req.seed, req.time_cap,
            start=req.start, checkpoint_dt=req.checkpoint_dt,
        )
        csv = traj.to_csv() if g.n_vertices <= 64 else None
        return sc.SimulateResponse(
            n_vertices=g.n_vertices,
            seed=req.seed,
            time_cap=req.time_cap,
            extinction_time=traj.extinction_time,
            censored=traj.extinction_time is None,
            checkpoints=[
                sc.CheckpointOut(time=t, infected=sorted(conf))
                for t, conf in traj.checkpoints
            ],
            csv=csv,
        )

    @app.post("/v1/mean-tau", response_model=sc.MeanTauResponse)
    def mean_tau(req: sc.MeanTauRequest):
        g, spec = _resolve_graph(req)
        report = experiments.estimate_mean_extinction(
            g, req.lam, req.replicas, req.time_cap, req.seed,
            graph_spec=spec, constants=_constants(req.constants),
            include_samples=req.include_samples, jobs=req.jobs,
        )
        return sc.MeanTauResponse(
            report=_report_out(report),
            samples_csv=report.samples_csv() if req.include_samples else None,
        )

    @app.post("/v1/exact", response_model=sc.ExactResponse)
    def exact(req: sc.ExactRequest):
        g, _ = _resolve_graph(req)
        if req.quantity == "mean":
            value = exact_expected_extinction(g, req.lam)
            return sc.ExactResponse(quantity="mean_extinction_time", value=value,
                                    values=None, t_grid=None)
        if req.quantity == "survival":
            if req.t is None:
                raise GraphError("survival needs t")
            start = frozenset(req.start) if req.start is not None else frozenset(range(g.n_vertices))
            value = exact_transient_survival(g, req.lam, start, req.t, req.tol)
            return sc.ExactResponse(quantity=f"survival_probability@t={req.t!r}",
                                    value=value, values=None, t_grid=None)
        if not req.t_grid:
            raise GraphError("cdf needs t_grid")
        values = exact_cdf_extinction(g, req.lam, req.t_grid, req.tol)
        return sc.ExactResponse(quantity="extinction_cdf", value=None,
                                values=values, t_grid=list(req.t_grid))

    @app.post("/v1/exp1", response_model=sc.Exp1Response)
    def exp1(req: sc.Exp1Request):
        g, spec = _resolve_graph(req)
        report = experiments.estimate_mean_extinction(
            g, req.lam, req.replicas, req.time_cap, req.seed,
            graph_spec=spec, include_samples=True, jobs=req.jobs,
        )
        taus = [v for _, v, censored in report.samples if not censored]
        result = experiments.exp1_test(taus, alpha=req.alpha, bootstrap_seed=req.seed)
        return sc.Exp1Response(
            ks_distance=result.ks_distance,
            threshold=result.threshold,
            alpha=result.alpha,
            n_samples=result.n_samples,
            censored=report.censored,
            passed=result.passed,
            mean=float(np.mean(taus)),
        )

    @app.post("/v1/coupling", response_model=sc.CouplingResponse)
    def coupling(req: sc.CouplingRequest):
        g, spec = _resolve_graph(req)
        curve = experiments.coupling_decay_curve(
            g, req.lam, req.start, req.t_grid, req.replicas, req.seed, graph_spec=spec,
        )
        return sc.CouplingResponse(curve=[_report_out(r) for r in curve])

    @app.post("/v1/split", response_model=sc.SplitResponse)
    def split(req: sc.SplitRequest):
        g, _ = _resolve_graph(req)
        s = split_edge_balanced(g, req.degree_bound)
        return sc.SplitResponse(
            removed_edge=s.removed_edge,
            side_a=sorted(s.side_a),
            side_b=sorted(s.side_b),
        )

    @app.post("/v1/classify", response_model=sc.ClassifyResponse)
    def classify(req: sc.ClassifyRequest):
        g, _ = _resolve_graph(req)
        dec = classify_tree(g, req.a_const, req.exponent_eps, req.mode)
        return sc.ClassifyResponse(
            kind=dec.kind.value,
            witness=dec.witness,
            level_k=dec.level_k,
            branch=dec.branch,
            parts=[sorted(p) for p in dec.parts],
        )

    @app.post("/v1/bounds", response_model=sc.BoundsResponse)
    def bounds(req: sc.BoundsRequest):
        g, spec = _resolve_graph(req)
        consts = _constants(req.constants)
        if req.check == "attract":
            grid = req.t_grid or [0.5, 1.0, 2.0, 4.0]
            checks = experiments.check_attract_bound(
                g, req.lam, grid, req.replicas, req.seed, graph_spec=spec)
        elif req.check == "product":
            if req.parts:
                parts = [frozenset(p) for p in req.parts]
            elif req.auto_split:
                parts = iterated_split(g, req.auto_split, req.min_part_size,
                                       max(2, g.max_degree()))
            else:
                raise GraphError("product check needs parts or auto_split")
            checks = experiments.check_product_bound(
                g, parts, req.lam, req.replicas, req.seed,
                constants=consts, graph_spec=spec)
        else:
            checks = [experiments.survival_floor_check(
                g, req.lam, req.eps, consts.c_eps, req.replicas, req.seed,
                graph_spec=spec)]
        return sc.BoundsResponse(
            checks=[sc.BoundCheckOut(**c.to_json_dict()) for c in checks])

    @app.post("/v1/growth", response_model=sc.GrowthResponse)
    def growth(req: sc.GrowthRequest):
        res = experiments.growth_curve(
            req.family, req.sizes, req.lam, req.replicas, req.time_cap,
            req.seed, jobs=req.jobs)
        return sc.GrowthResponse(
            family=res.family,
            sizes=list(res.sizes),
            per_size=[_report_out(r) for r in res.reports],
            used_sizes=list(res.used_sizes),
            slope=res.slope,
            slope_se=res.slope_se,
            ci95=res.ci95,
            intercept=res.intercept,
        )

    @app.post("/v1/calibrate", response_model=sc.CalibrateResponse)
    def calibrate(req: sc.CalibrateRequest):
        res = experiments.calibrate_constants(req.lam, req.budget, req.seed, eps=req.eps)
        return sc.CalibrateResponse(
            constants=sc.ConstantsOut(**res.constants.to_dict()),
            probe_log=list(res.probe_log),
        )

    @app.post("/v1/dual-check", response_model=sc.DualCheckResponse)
    def dual(req: sc.DualCheckRequest):
        g, spec = _resolve_graph(req)
        out = experiments.dual_check(g, req.lam, req.t, req.fixtures, req.seed,
                                     graph_spec=spec)
        return sc.DualCheckResponse(**{
            "checked": out["checked"],
            "failures": out["failures"],
            "graph": out["graph"],
            "lambda": out["lambda"],
            "t": out["t"],
            "seed": out["seed"],
        })

    @app.post("/v1/lit", response_model=sc.LitResponse)
    def lit(req: sc.LitRequest):
        g, spec = _resolve_graph(req)
        check = process.is_lit(g, req.configuration, req.lam, req.c0,
                               req.replicas, req.seed, graph_spec=spec)
        return sc.LitResponse(
            report=_report_out(check.report),
            threshold=check.threshold,
            time_horizon=check.time_horizon,
            lit=check.lit,
            decisive=check.decisive,
        )

    @app.post("/v1/right-edge", response_model=sc.RightEdgeResponse)
    def right_edge(req: sc.RightEdgeRequest):
        trace = process.right_edge_trace(req.n, req.lam, req.seed, req.t_max)
        return sc.RightEdgeResponse(
            points=[sc.RightEdgePoint(time=t, right_edge=r) for t, r in trace.points],
            extinction_time=trace.extinction_time,
            t_max=trace.t_max,
        )

    return app
