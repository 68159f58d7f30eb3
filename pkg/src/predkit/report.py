"""Run reports: the JSON record of a CLI run and its text rendering."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field


def file_sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


@dataclass
class RunReport:
    command: list
    model_sha256: str | None = None
    predicates: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    config: dict | None = None
    matrices: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @staticmethod
    def from_json(text: str) -> "RunReport":
        return RunReport(**json.loads(text))

    def deterministic_part(self) -> dict:
        d = asdict(self)
        d.pop("timings")
        return d


def compat_matrix_json(m) -> dict:
    preds = list(m.preds)
    cells, verdicts = [], []
    for p in preds:
        row, vrow = [], []
        for q in preds:
            if p.index == q.index:
                row.append(None)
                vrow.append(None)
            else:
                key = (min(p.index, q.index), max(p.index, q.index))
                row.append(m.compat[key])
                vrow.append(m.verdicts.get(key))
        cells.append(row)
        verdicts.append(vrow)
    return {"preds": [str(p.atom) for p in preds], "matrix": cells, "verdicts": verdicts}


def trlimp_matrix_json(scores) -> dict:
    preds = list(scores.preds)
    cells = []
    for p in preds:
        row = []
        for q in preds:
            row.append(None if p.index == q.index else scores.pairwise(p, q))
        cells.append(row)
    return {
        "preds": [str(p.atom) for p in preds],
        "IS": [scores.IS[p.index] for p in preds],
        "PwS": cells,
    }


def _grid(names, cell, diag=None) -> str:
    n = len(names)
    heads = [str(i + 1) for i in range(n)]
    width = max([len(h) for h in heads] + [1])
    body = [[(diag(i) if diag else "-") if i == j else cell(i, j) for j in range(n)]
            for i in range(n)]
    width = max([width] + [len(c) for row in body for c in row])
    lines = [" " * (len(str(n)) + 1) + " ".join(h.rjust(width) for h in heads)]
    for i, row in enumerate(body):
        lines.append(str(i + 1).rjust(len(str(n))) + " " + " ".join(c.rjust(width) for c in row))
    lines.append("")
    for i, name in enumerate(names):
        lines.append(f"{i + 1:>{len(str(n))}}: {name}")
    return "\n".join(lines)


def render(report: RunReport) -> str:
    out = [f"command: {' '.join(report.command)}"]
    if report.model_sha256:
        out.append(f"model sha256: {report.model_sha256}")
    m = report.matrices.get("compat")
    if m:
        out.append("")
        out.append("compatibility on the small instance (✓ = property proved)")
        out.append(_grid(m["preds"],
                         lambda i, j: "✓" if m["matrix"][i][j] else "·"))
    t = report.matrices.get("trlimp")
    if t:
        out.append("")
        out.append("imprecision scores (diagonal: individual, off-diagonal: pairwise)")
        out.append(_grid(t["preds"], lambda i, j: str(t["PwS"][i][j]),
                         diag=lambda i: f"[{t['IS'][i]}]"))
    if report.config:
        c = report.config
        out.append("")
        out.append(f"chosen: {{{', '.join(c['preds'])}}}  vars={c['num_vars']}  score={c['score']}")
    for k, v in sorted(report.verdicts.items()):
        out.append(f"verdict[{k}]: {v}")
    return "\n".join(out) + "\n"
