"""Structured verification records with a text and a JSON rendering."""

import json
from dataclasses import asdict, dataclass, field

PASS, FAIL, INFO = "PASS", "FAIL", "INFO"


@dataclass
class Record:
    id: str
    statement: str
    verdict: str
    dims: dict = field(default_factory=dict)
    seed: int = 0
    mode: str = "exact"          # exact | exhaustive | sampled
    detail: str = ""

    def text(self):
        dims = " ".join(f"{k}={v}" for k, v in self.dims.items())
        out = f"[{self.verdict}] {self.id}: {self.statement} | mode={self.mode} seed={self.seed}"
        if dims:
            out += f" | {dims}"
        if self.detail:
            out += f" | {self.detail}"
        return out


@dataclass
class Report:
    header: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    def add(self, record):
        self.records.append(record)
        return record

    def sorted(self):
        return Report(dict(self.header), sorted(self.records, key=lambda r: r.id))

    @property
    def passed(self):
        return all(r.verdict != FAIL for r in self.records)

    def text(self):
        lines = [f"# {k}: {v}" for k, v in self.header.items()]
        lines += [r.text() for r in self.records]
        return "\n".join(lines) + "\n"

    def json(self):
        return json.dumps({"header": self.header, "records": [asdict(r) for r in self.records]},
                          indent=2, sort_keys=True, default=str)


def verdict(flag):
    return PASS if flag else FAIL
