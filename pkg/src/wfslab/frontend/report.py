"""Task reports: line-delimited JSON records plus a human summary.

Records carry no timestamps or addresses, so two runs with the same document
and bounds produce byte-identical output.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

from ..kernel import Report
from ..moore import EQUATION_LABELS

FORMAT = "wfslab-report"
VERSION = 1
STATUSES = ("pass", "fail", "resource-limit")
EXIT_CODES = {"pass": 0, "fail": 1, "resource-limit": 2}
USAGE_EXIT = 3

# internal check stem -> equation label, beyond the Moore diagram families
LABELS = {
    **EQUATION_LABELS,
    "natural": "naturality of the structure maps",
    "monad": "monad laws of the right factor",
    "comonad_law": "comonad laws of the left factor",
    "strength_square": "strength against the connection and the start point",
    "derived_iota": "symmetry derived from the weak data",
    "factorization": "right factor after left factor recovers the morphism",
    "lambda_coalg": "left factor carries a coalgebra",
    "rho_alg": "right factor carries an algebra",
    "coalg_witness": "coalgebra witness solves its lifting square",
    "alg_witness": "algebra witness solves its lifting square",
    "lift_exists": "diagonal filler between the two classes",
    "commutes": "lifting square commutes",
    "fibrant": "object is fibrant",
    "pullback_stable": "left class stable under pullback along the right class",
    "same_left": "left classes of the two factorizations agree",
    "same_right": "right classes of the two factorizations agree",
    "endpoint_alg": "endpoint map of the relation is in the right class",
    "pullback_coalg": "pulled-back point is in the left class",
    "eps_alg": "slice endpoint map is in the right class",
    "reflexive": "slice relation retracts onto the point",
    "over_base": "slice relation lies over the base",
    "override": "slice point agrees with the pulled-back point",
    "endpoints_are_rho_diagonal": "endpoints are the right factor of the diagonal",
    "rho_diagonal_alg": "right factor of the diagonal is in the right class",
    "type-theoretic": "type-theoretic weak factorization system",
    "in_left": "left factor is in the left class",
    "in_right": "right factor is in the right class",
    "i_lands_over_Y": "transpose lands over the base",
    "j_lands_over_X": "untranspose lands over the total space",
    "i.j=1": "transpose after untranspose is the identity",
    "j.i=1": "untranspose after transpose is the identity",
    "transpose_alg": "transposed lift is an algebra",
    "search_alg": "right class closed under dependent products",
    "eps0.eta=1": "first endpoint retracts the point",
    "eps1.eta=1": "second endpoint retracts the point",
    "kappa.lambda=1": "kappa retracts the left factor",
    "rho.lambda=f": "right factor after left factor recovers the morphism",
    "category": "category axioms of a declared presentation",
    "functor": "functor laws of a declared table",
    "witness": "witness matches its relation",
    "unsupported": "operation unavailable in this ambient",
    "resource": "resource bound",
    "certificate": "certificate revalidates",
    "structure": "well-formed input data",
}

_STAGE = re.compile(r"\[[^\]]*\]")


def equation_of(check: str) -> str:
    """Most specific labelled piece of a check name such as
    ``wfs:lambda_coalg`` or ``intcat2[left_unit]``."""
    parts = [_STAGE.sub("", p).strip() for p in check.split(":")]
    for p in reversed(parts):
        if p in LABELS:
            return p
    return parts[0]


def label_of(equation: str) -> str:
    return LABELS.get(equation, equation.replace("_", " "))


def check_record(name: str, subject: str, ok: bool, detail: str = "") -> dict:
    eq = equation_of(name)
    return {"record": "check", "check": name, "subject": subject, "ok": bool(ok), "detail": detail,
            "equation": eq, "label": label_of(eq)}


@dataclass
class TaskReport:
    task: str
    kind: str
    status: str = "pass"
    environment: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    version: int = VERSION

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    @property
    def checks(self) -> list[dict]:
        return [r for r in self.records if r["record"] == "check"]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.checks if not r["ok"]]

    @property
    def witnesses(self) -> list[dict]:
        return [r for r in self.records if r["record"] == "witness"]

    def add(self, name: str, subject, ok: bool, detail: str = "") -> bool:
        self.records.append(check_record(name, str(subject), ok, detail))
        return bool(ok)

    def absorb(self, rep: Report, prefix: str = "") -> bool:
        for c in rep.checks:
            self.records.append(check_record(prefix + c.name, c.subject, c.ok, c.detail))
        for t in rep.notes:
            if t not in self.notes:
                self.notes.append(t)
        return rep.ok

    def add_witness(self, kind: str, subject: str, digest: str) -> None:
        self.records.append({"record": "witness", "kind": kind, "subject": subject, "digest": digest})

    def settle(self) -> None:
        """Fail if any check failed and nothing more severe happened."""
        if self.status == "pass" and (self.failures or not self.checks):
            self.status = "fail"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def render_json_lines(rep: TaskReport) -> str:
    lines = [_dump({"record": "header", "format": FORMAT, "version": rep.version, "task": rep.task,
                    "kind": rep.kind, "environment": rep.environment})]
    lines += [_dump(r) for r in rep.records]
    lines += [_dump({"record": "note", "text": t}) for t in rep.notes]
    lines.append(_dump({"record": "status", "status": rep.status, "checks": len(rep.checks),
                        "failures": len(rep.failures)}))
    return "\n".join(lines) + "\n"


def read_report(text: str) -> TaskReport:
    """Inverse of :func:`render_json_lines`."""
    rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not rows or rows[0].get("record") != "header" or rows[0].get("format") != FORMAT:
        raise ValueError("not a wfslab report")
    head = rows[0]
    if head["version"] != VERSION:
        raise ValueError(f"unsupported report version {head['version']}")
    rep = TaskReport(head["task"], head["kind"], environment=head["environment"], version=head["version"])
    for r in rows[1:]:
        kind = r["record"]
        if kind == "note":
            rep.notes.append(r["text"])
        elif kind == "status":
            rep.status = r["status"]
        else:
            rep.records.append(r)
    return rep


def render_text(rep: TaskReport) -> str:
    env = rep.environment
    out = [f"{FORMAT} v{rep.version}: task {rep.task} ({rep.kind})"]
    if env:
        b = env.get("bounds", {})
        out.append(f"  universe {env.get('universe')} over {env.get('ambient')}: seeds [{', '.join(env.get('seeds', []))}], "
                   f"closure depth {env.get('depth')}")
        out.append("  bounds " + ", ".join(f"{k}={v}" for k, v in sorted(b.items())))
        out.append(f"  document {env.get('document_digest')}")
    total: Counter = Counter()
    passed: Counter = Counter()
    for r in rep.checks:
        total[r["equation"]] += 1
        passed[r["equation"]] += r["ok"]
    if total:
        width = max(len(e) for e in total)
        for eq in sorted(total):
            out.append(f"  {eq.ljust(width)}  {passed[eq]}/{total[eq]}  {label_of(eq)}")
    if rep.witnesses:
        out.append(f"  {len(rep.witnesses)} witness digests recorded")
    for r in rep.failures[:20]:
        detail = f": {r['detail']}" if r["detail"] else ""
        out.append(f"  FAIL {r['check']} at {r['subject']} [{r['equation']}: {r['label']}]{detail}")
    if len(rep.failures) > 20:
        out.append(f"  ... {len(rep.failures) - 20} more failures")
    for t in rep.notes:
        out.append(f"  note: {t}")
    out.append(f"status: {rep.status}")
    return "\n".join(out) + "\n"
