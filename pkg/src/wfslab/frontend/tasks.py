"""Run the task blocks of a document and collect reports."""

from __future__ import annotations

import hashlib
from dataclasses import asdict

from ..ambient import Bounds, ResourceLimitError, UnsupportedOperation, use_bounds
from ..idtypes import check_pi, is_id_presentation, roundtrip_maps
from ..kernel import StructuralError
from ..lifting import LiftingProblem, WfsCertificate, certify, check_llp_pairs, check_type_theoretic, digest, equivalent_wfs, solve_lift
from ..moore import ConstructionError, check_strict, check_weak, downgrade, extract_homotopical, witness_provider
from ..shapes import UniverseError, describe, validate_assignment, validate_relational_factorization
from ..transforms import rho, sigma_lower_star, tau, validate_assignment_morphism
from .build import BuildError, Workspace, bounds_with
from .report import TaskReport
from .syntax import SpecDocument, TaskDecl, parse, serialize


class UsageError(LookupError):
    """Unknown task or malformed invocation (exit code 3)."""


BOUND_KEYS = ("max-set-size", "max-objects", "max-morphisms", "max-homs")


def find_tasks(doc: SpecDocument, selector: str | None) -> list[TaskDecl]:
    """Tasks named ``selector``, else tasks running that kind; all when ``None``."""
    tasks = doc.tasks
    if selector is None:
        return tasks
    named = [t for t in tasks if t.name == selector]
    if named:
        return named
    kinds = [t for t in tasks if t.run == selector]
    if kinds:
        return kinds
    known = ", ".join(t.name for t in tasks) or "none"
    raise UsageError(f"unknown task {selector!r} (tasks in this document: {known})")


def document_digest(doc: SpecDocument) -> str:
    return hashlib.sha256(serialize(doc).encode()).hexdigest()[:16]


def run_task(doc: SpecDocument, name: str, depth: int | None = None, bounds: dict | None = None,
             workspace: Workspace | None = None) -> TaskReport:
    """Run one task.  ``depth`` and ``bounds`` (keys such as ``max-homs``)
    override the document's universe depth and the task's own bounds."""
    task = doc.get(name, "task")
    if task is None:
        raise UsageError(f"unknown task {name!r}")
    ws = workspace or Workspace(doc)
    opts = dict(task.options)
    udecl = doc.get(opts["universe"], "universe")
    depth = udecl.depth if depth is None else depth
    if depth < 1:
        raise UsageError("universe depth must be at least 1")
    b = bounds_with(Bounds(), {k: opts.get(k) for k in BOUND_KEYS})
    b = bounds_with(b, bounds or {})
    text = serialize(doc)
    env = {
        "bounds": asdict(b),
        "universe": udecl.name,
        "ambient": udecl.ambient,
        "seeds": list(udecl.seeds),
        "depth": depth,
        "document_digest": hashlib.sha256(text.encode()).hexdigest()[:16],
        "document": text,
    }
    rep = TaskReport(task.name, task.run, environment=env)
    with use_bounds(b):
        try:
            if rep.absorb(ws.validate_declared(), "declared:"):
                RUNNERS[task.run](ws, task, opts, depth, rep)
            rep.settle()
        except ResourceLimitError as exc:
            rep.add("resource", exc.what, False, str(exc))
            rep.status = "resource-limit"
        except BuildError as exc:
            rep.add(exc.check, exc.subject, False, exc.detail)
            rep.status = "fail"
        except ConstructionError as exc:
            rep.add(exc.stage, task.name, False, exc.detail)
            rep.status = "fail"
        except StructuralError as exc:
            rep.add("structure", task.name, False, str(exc))
            rep.status = "fail"
        except UnsupportedOperation as exc:
            rep.add("unsupported", task.name, False, str(exc))
            rep.status = "fail"
        except UniverseError as exc:
            rep.add("universe", udecl.name, False, str(exc))
            rep.status = "fail"
    return rep


def replay(rep: TaskReport) -> TaskReport:
    """Re-run a report's task from the document and environment it embeds."""
    env = rep.environment
    doc = parse(env["document"])
    bounds = {k.replace("_", "-"): v for k, v in env["bounds"].items()}
    return run_task(doc, rep.task, depth=env["depth"], bounds=bounds)


# Runners -------------------------------------------------------------------------------

def _setting(ws: Workspace, opts: dict, depth: int):
    r = ws.relation(opts["relation"])
    return r, ws.universe(opts["universe"], r, depth)


def _certificate(ws, opts, depth, rep: TaskReport) -> WfsCertificate | None:
    r, u = _setting(ws, opts, depth)
    fa = tau(r)
    provider = witness_provider(ws.witness(opts["witness"]), fa) if "witness" in opts else None
    cert, crep = certify(fa, u, provider)
    rep.absorb(crep, "wfs:")
    if cert is not None:
        for kind, subject, d in cert.records():
            rep.add_witness(kind, subject, d)
    return cert


def _check_mrs(ws, task, opts, depth, rep):
    r, u = _setting(ws, opts, depth)
    rep.absorb(check_weak(downgrade(ws.witness(opts["witness"])), u))


def _check_strict_mrs(ws, task, opts, depth, rep):
    r, u = _setting(ws, opts, depth)
    rep.absorb(check_strict(ws.witness(opts["witness"]), u))


def _check_idpres(ws, task, opts, depth, rep):
    r, u = _setting(ws, opts, depth)
    idp, irep = is_id_presentation(r, u)
    rep.absorb(irep)
    if idp is not None:
        for kind, subject, d in idp.records():
            rep.add_witness(kind, subject, d)


def _check_tt(ws, task, opts, depth, rep):
    cert = _certificate(ws, opts, depth, rep)
    if cert is not None:
        rep.absorb(check_type_theoretic(cert), "tt:")


def _factorize(ws, task, opts, depth, rep):
    r, u = _setting(ws, opts, depth)
    fa = tau(r)
    if "morphism" in opts:
        f = ws.functor(opts["morphism"])
        p = sigma_lower_star(r, f)
        rep.absorb(validate_relational_factorization(p))
        for part, m in (("lambda", p.lam), ("rho", p.rho), ("kappa", p.kap)):
            rep.add_witness(part, describe(f), digest(m))
    else:
        rep.absorb(validate_assignment(fa, u))


def _lift(ws, task, opts, depth, rep):
    if "left" in opts:
        left, right, top, bottom = (ws.functor(opts[s]) for s in ("left", "right", "top", "bottom"))
        p = LiftingProblem(left, right, top, bottom)
        subject = f"{opts['left']} / {opts['right']}"
        if rep.add("lift:commutes", subject, p.commutes()):
            w = solve_lift(p)
            if rep.add("lift_exists", subject, w is not None and w.check()):
                rep.add_witness("diagonal", subject, digest(w.diagonal))
        return
    cert = _certificate(ws, opts, depth, rep)
    if cert is not None:
        rep.absorb(check_llp_pairs(cert, opts.get("limit", 400)), "llp:")


def _extract_mrs(ws, task, opts, depth, rep):
    cert = _certificate(ws, opts, depth, rep)
    if cert is not None:
        rep.absorb(check_weak(extract_homotopical(cert, cert.universe), cert.universe), "extracted:")


def _roundtrip(ws, task, opts, depth, rep):
    r, u = _setting(ws, opts, depth)
    idp, irep = is_id_presentation(r, u)
    if not rep.absorb(irep, "idpres:"):
        return
    there, back = roundtrip_maps(idp)
    rep.absorb(validate_assignment_morphism(there, u), "forward:")
    rep.absorb(validate_assignment_morphism(back, u), "backward:")
    for x in u.objects:
        rep.add_witness("forward", u.ambient.show(x), digest(there.at(x)))
        rep.add_witness("backward", u.ambient.show(x), digest(back.at(x)))


def _equiv(ws, task, opts, depth, rep):
    r, u = _setting(ws, opts, depth)
    fa = tau(r)
    rep.absorb(equivalent_wfs(fa, tau(rho(fa)), u))


def _check_pi(ws, task, opts, depth, rep):
    cert = _certificate(ws, opts, depth, rep)
    if cert is not None:
        rep.absorb(check_pi(cert), "pi:")


RUNNERS = {
    "check-mrs": _check_mrs,
    "check-strict-mrs": _check_strict_mrs,
    "check-idpres": _check_idpres,
    "check-tt": _check_tt,
    "factorize": _factorize,
    "lift": _lift,
    "extract-mrs": _extract_mrs,
    "roundtrip": _roundtrip,
    "equiv": _equiv,
    "check-pi": _check_pi,
}
