"""Command-line front end.

Subcommands: classify | solve | trace | audit | gallery | report.
Problems arrive as JSON documents (schema problem-v1, validated before
any computation; unknown keys are rejected).  Reports are JSON on
stdout; traces are CSV on stdout with their verification report on
stderr.  Everything is deterministic: identical inputs and flags produce
byte-identical output (floats serialize in shortest round-trip form, and
no randomness is used anywhere).

Exit codes: 0 success / verdict uniqueness-applies; 2 input or schema
error; 3 indeterminate classification; 4 resonance; 5 criterion-fails;
6 hypotheses-fail; 7 inconclusive audit.
"""

from __future__ import annotations

import json
import sys

import click
import jsonschema
import numpy as np

from .core import Disc, Sector, SingpdeError, WeightFn
from .expr import EvalDomainError, ExprSyntaxError, PdeSpec, parse
from .classify import (CaseClass, IndeterminateCaseError,
                       UnsupportedShapeError, check_A2, classify)
from . import audit as au
from . import characteristics as ch
from . import gallery as ga
from . import series as se
from . import expr as ex

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INDETERMINATE = 3
EXIT_RESONANCE = 4
EXIT_CRITERION = 5
EXIT_HYPOTHESES = 6
EXIT_INCONCLUSIVE = 7

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["rhs", "domain"],
    "properties": {
        "rhs": {"type": "string"},
        "euler_form": {"type": "boolean"},
        "weight": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["power", "log-power"]},
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["T0", "R0", "rho0"],
            "properties": {
                "T0": {"type": "number", "exclusiveMinimum": 0},
                "R0": {"type": "number", "exclusiveMinimum": 0},
                "rho0": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "sector": {
            "type": "object",
            "additionalProperties": False,
            "required": ["theta", "R"],
            "properties": {
                "theta": {"type": "number", "exclusiveMinimum": 0},
                "R": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "solutions": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "expr"],
                "properties": {"name": {"type": "string"},
                               "expr": {"type": "string"}},
            },
        },
        "ladders": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "R": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                "eta": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                "sigma": {"type": "array", "items": {"type": "number"}, "minItems": 4},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "classify_tol": {"type": "number", "exclusiveMinimum": 0},
                "res_tol": {"type": "number", "exclusiveMinimum": 0},
                "trace_tol": {"type": "number", "exclusiveMinimum": 0},
                "audit_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


class Problem:
    def __init__(self, doc: dict):
        weight_doc = doc.get("weight", {"kind": "power", "alpha": 1.0})
        T0 = doc["domain"]["T0"]
        kwargs = {"T0": min(T0, 0.9) if weight_doc["kind"] == "log-power" else T0}
        if weight_doc["kind"] == "power":
            kwargs["alpha"] = weight_doc.get("alpha", 1.0)
        else:
            kwargs["beta"] = weight_doc.get("beta", 2.0)
        weight = WeightFn(weight_doc["kind"], **kwargs)
        sector = None
        if "sector" in doc:
            sector = Sector(doc["sector"]["theta"], doc["sector"]["R"])
        self.pde = PdeSpec.from_text(doc["rhs"],
                                     euler_form=doc.get("euler_form", False),
                                     weight=weight, T0=T0,
                                     R0=doc["domain"]["R0"],
                                     rho0=doc["domain"]["rho0"], sector=sector)
        self.solutions = {}
        for item in doc.get("solutions", []):
            self.solutions[item["name"]] = au.SolutionField.from_expr(item["expr"])
        self.ladders = doc.get("ladders", {})
        self.tolerances = doc.get("tolerances", {})


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_problem(path: str) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read problem file: {exc}", EXIT_INPUT)
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        _fail(f"problem file rejected by schema problem-v1: {exc.message}", EXIT_INPUT)
    try:
        return Problem(doc)
    except (SingpdeError, ExprSyntaxError, ValueError) as exc:
        _fail(str(exc), EXIT_INPUT)


def _emit(obj: dict):
    click.echo(json.dumps(obj, indent=2))


def _complex_pair(z):
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


def _classification_dict(cc: CaseClass) -> dict:
    return {
        "schema": "classify-v1",
        "case": cc.case_id,
        "convention": cc.convention,
        "p": cc.p,
        "lambda00": _complex_pair(cc.lambda00),
        "c00": _complex_pair(cc.c00),
        "hypotheses": cc.hypotheses,
        "hypotheses_ok": cc.hypotheses_ok,
    }


@click.group()
@click.option("--tol", type=float, default=None,
              help="Override the default classification/trace tolerance.")
@click.option("--grid-density", type=int, default=64,
              help="Angular sample count used by audit grids.")
@click.option("--seedless", is_flag=True,
              help="Assert that no random number generator is involved (always true; recorded in reports).")
@click.pass_context
def main(ctx, tol, grid_density, seedless):
    """Verification tools for singular equations t*u_t = F(t, x, u, u_x)."""
    ctx.obj = {"tol": tol, "grid_density": grid_density, "seedless": seedless}


@main.command("classify")
@click.argument("problem", type=click.Path())
@click.pass_context
def cmd_classify(ctx, problem):
    """Classify the equation and report the extracted coefficients."""
    prob = _load_problem(problem)
    tol = ctx.obj["tol"] or 1e-9
    try:
        cc = classify(prob.pde, tol=tol)
    except (IndeterminateCaseError, UnsupportedShapeError) as exc:
        _emit({"schema": "classify-v1", "error": str(exc)})
        sys.exit(EXIT_INDETERMINATE)
    doc = _classification_dict(cc)
    a2 = check_A2(prob.pde, cc)
    doc["a2"] = a2.to_dict()
    doc["seedless"] = True
    _emit(doc)


@main.command("solve")
@click.argument("problem", type=click.Path())
@click.option("--order", nargs=2, type=int, default=(8, 8), metavar="M N")
@click.pass_context
def cmd_solve(ctx, problem, order):
    """Build the truncated series solution and report its residual."""
    prob = _load_problem(problem)
    try:
        cc = classify(prob.pde, tol=ctx.obj["tol"] or 1e-9)
    except (IndeterminateCaseError, UnsupportedShapeError) as exc:
        _fail(str(exc), EXIT_INDETERMINATE)
    if cc.case_id == 3:
        _fail("series build is not supported on the irregular-singular case", EXIT_INPUT)
    M, N = order
    res_tol = prob.tolerances.get("res_tol", 1e-8)
    try:
        ds = se.build_solution(prob.pde, cc, M=M, N=N, res_tol=res_tol)
    except se.ResonanceError as exc:
        _emit({"schema": "series-v1", "error": "resonance",
               "resonances": [[i, j, d] for i, j, d in exc.resonances]})
        sys.exit(EXIT_RESONANCE)
    from .core import Grid
    grid = Grid.for_disc(Disc(prob.pde.R0 / 2), prob.pde.T0 / 3, 1e-3, n_times=12,
                         n_circles=3, n_angles=8)
    doc = ds.to_json_dict()
    doc["residual"] = se.residual(prob.pde, ds, grid)
    doc["small_divisors"] = [[i, j, d] for i, j, d in ds.small_divisors]
    doc["seedless"] = True
    _emit(doc)


def _parse_complex(text: str) -> complex:
    try:
        return complex(ex.eval_expr(parse(text)))
    except (ExprSyntaxError, EvalDomainError) as exc:
        _fail(f"cannot parse complex value {text!r}: {exc}", EXIT_INPUT)


@main.command("trace")
@click.argument("problem", type=click.Path())
@click.option("--xi", required=True, help="Start point, e.g. 0.05 or 0.04+0.01i.")
@click.option("--t0", type=float, default=0.1)
@click.option("--tmin", type=float, default=1e-6)
@click.option("--solution", "solution_name", default=None,
              help="Transported pair: this solution against --base.")
@click.option("--base", "base_name", default=None,
              help="Base solution of the pair (default: zero).")
@click.pass_context
def cmd_trace(ctx, problem, xi, t0, tmin, solution_name, base_name):
    """Trace one characteristic; CSV on stdout, report on stderr."""
    prob = _load_problem(problem)
    tol = ctx.obj["tol"] or 1e-9
    try:
        cc = classify(prob.pde)
    except (IndeterminateCaseError, UnsupportedShapeError) as exc:
        _fail(str(exc), EXIT_INDETERMINATE)
    xi_val = _parse_complex(xi)

    def pick(name):
        if name is None:
            return au.SolutionField.zero()
        if name not in prob.solutions:
            _fail(f"unknown solution {name!r}", EXIT_INPUT)
        return prob.solutions[name]

    sol = pick(solution_name)
    base = pick(base_name)
    fs = au.hadamard_fields(prob.pde, cc, base, sol)
    try:
        tr = ch.trace(fs, t0, xi_val, tmin, tol=tol)
        w0 = sol.u(t0, xi_val) - base.u(t0, xi_val)
        q0 = sol.ux(t0, xi_val) - base.ux(t0, xi_val)
        if cc.case_id == 3:
            q0 = xi_val * q0
        tr = ch.transport(fs, tr, w0, q0, tol=tol)
    except SingpdeError as exc:
        _fail(str(exc), EXIT_INPUT)
    click.echo(tr.to_csv(), nl=False)

    report = {"schema": "trace-v1", "status": tr.status,
              "t_xi": tr.t_xi,
              "exit_point": _complex_pair(tr.exit_point), "seedless": True}
    if fs.a_decay is not None and tr.status != ch.STEP_FAILURE:
        report["decay"] = ch.verify_decay(tr, max_pairs=500).to_dict()
    if cc.case_id == 3 and tr.status != ch.STEP_FAILURE:
        report["phi_factor"] = ch.phi_factor(tr).to_dict()
        try:
            report["reconstruction"] = ch.sector_reconstruct(tr).to_dict()
        except SingpdeError as exc:
            report["reconstruction"] = {"error": str(exc)}
    click.echo(json.dumps(report, indent=2), err=True)
    if tr.status == ch.STEP_FAILURE:
        sys.exit(1)


@main.command("audit")
@click.argument("problem", type=click.Path())
@click.option("--solution", "solution_name", required=True)
@click.option("--base", "base_name", default=None,
              help="Reference solution (default: built series, else zero).")
@click.pass_context
def cmd_audit(ctx, problem, solution_name, base_name):
    """Audit the uniqueness criterion for one declared solution."""
    prob = _load_problem(problem)
    try:
        cc = classify(prob.pde)
    except (IndeterminateCaseError, UnsupportedShapeError) as exc:
        _fail(str(exc), EXIT_INDETERMINATE)
    if solution_name not in prob.solutions:
        _fail(f"unknown solution {solution_name!r}", EXIT_INPUT)
    u = prob.solutions[solution_name]
    if base_name is not None:
        if base_name not in prob.solutions:
            _fail(f"unknown solution {base_name!r}", EXIT_INPUT)
        base = prob.solutions[base_name]
    else:
        base = None
        if cc.case_id in (1, 2) and cc.lambda00.real < 0:
            try:
                base = au.SolutionField.from_series(se.build_solution(prob.pde, cc))
            except se.ResonanceError:
                base = None
        if base is None:
            base = au.SolutionField.zero()
    kwargs = {}
    if cc.case_id == 3 and prob.pde.sector is not None:
        if "eta" in prob.ladders:
            kwargs["eta_ladder"] = tuple(prob.ladders["eta"])
    elif "R" in prob.ladders:
        kwargs["R_ladder"] = tuple(prob.ladders["R"])
    if "sigma" in prob.ladders:
        kwargs["sigma_ladder"] = tuple(prob.ladders["sigma"])
    audit_tol = prob.tolerances.get("audit_tol", 1e-9)
    rep = au.verdict(prob.pde, cc, u, base, audit_tol=audit_tol, **kwargs)
    doc = rep.to_dict()
    doc["solution"] = solution_name
    doc["seedless"] = True
    _emit(doc)
    sys.exit({au.VERDICT_UNIQUE: EXIT_OK,
              au.VERDICT_CRITERION: EXIT_CRITERION,
              au.VERDICT_HYPOTHESES: EXIT_HYPOTHESES}.get(rep.verdict,
                                                          EXIT_INCONCLUSIVE))


@main.command("gallery")
@click.argument("case_id", required=False)
@click.option("--all", "run_all", is_flag=True)
@click.pass_context
def cmd_gallery(ctx, case_id, run_all):
    """Run the built-in catalogue oracles (one entry, or --all)."""
    if run_all:
        ids = [case.id for case in ga.list_cases()]
    elif case_id is not None:
        if case_id not in {c.id for c in ga.list_cases()}:
            _fail(f"unknown gallery id {case_id!r}", EXIT_INPUT)
        ids = [case_id]
    else:
        _fail("give a gallery id or --all", EXIT_INPUT)
    entries = [ga.run(i) for i in ids]
    n_pass = sum(1 for e in entries if e["passed"])
    doc = {"schema": "gallery-v1", "entries": entries,
           "passed": n_pass == len(entries),
           "summary": f"{n_pass}/{len(entries)} pass", "seedless": True}
    _emit(doc)
    sys.exit(EXIT_OK if doc["passed"] else 1)


@main.command("report")
@click.argument("problem", type=click.Path())
@click.pass_context
def cmd_report(ctx, problem):
    """Full pipeline: classification, weight check, series, audits."""
    prob = _load_problem(problem)
    doc = {"schema": "report-v1", "seedless": True}
    try:
        cc = classify(prob.pde, tol=ctx.obj["tol"] or 1e-9)
    except (IndeterminateCaseError, UnsupportedShapeError) as exc:
        doc["classification"] = {"error": str(exc)}
        _emit(doc)
        sys.exit(EXIT_INDETERMINATE)
    doc["classification"] = _classification_dict(cc)
    doc["a2"] = check_A2(prob.pde, cc).to_dict()
    base = au.SolutionField.zero()
    if cc.case_id in (1, 2):
        try:
            ds = se.build_solution(prob.pde, cc)
            from .core import Grid
            grid = Grid.for_disc(Disc(prob.pde.R0 / 2), prob.pde.T0 / 3, 1e-3,
                                 n_times=12, n_circles=3, n_angles=8)
            sdoc = ds.to_json_dict()
            sdoc["residual"] = se.residual(prob.pde, ds, grid)
            doc["series"] = sdoc
            if cc.lambda00.real < 0:
                base = au.SolutionField.from_series(ds)
        except se.ResonanceError as exc:
            doc["series"] = {"error": "resonance",
                             "resonances": [[i, j, d] for i, j, d in exc.resonances]}
    else:
        doc["series"] = None
    audits = []
    for name, sol in prob.solutions.items():
        rep = au.verdict(prob.pde, cc, sol, base)
        audit_doc = rep.to_dict()
        audit_doc["solution"] = name
        audits.append(audit_doc)
    doc["audits"] = audits
    _emit(doc)


if __name__ == "__main__":
    main()
