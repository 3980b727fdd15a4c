"""F1-based recovery score of a ground-truth organization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

from .kernel import Subspace


@dataclass
class EvalReport:
    q: float
    per_truth_best: list[tuple[int, float, int]]  # (truth index, best F1, detected index or -1)
    n_truth: int
    n_detected: int
    subspace_jaccard: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def csv_row(self, **extra) -> str:
        row = dict(extra)
        row.update(q=self.q, n_truth=self.n_truth, n_detected=self.n_detected)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writerow(row)
        return buf.getvalue()


def ground_truth_organization(ground_truth, concerned) -> list[frozenset[int]]:
    """Planted communities whose subspace contains every concerned dimension."""
    want = set(concerned.dims if isinstance(concerned, Subspace) else concerned)
    return [
        frozenset(c)
        for c, sub in zip(ground_truth.communities, ground_truth.subspaces)
        if want <= set(sub)
    ]


def f1(a, b) -> float:
    a, b = set(a), set(b)
    if not a:
        raise ValueError("reference community must be non-empty")
    hit = len(a & b)
    if hit == 0 or not b:
        return 0.0
    precision, recall = hit / len(b), hit / len(a)
    return 2 * precision * recall / (precision + recall)


def quality_q(truth_org, detected, truth_subspaces=None, detected_subspaces=None) -> EvalReport:
    """Mean over truth communities of the best F1 against any detected community.

    When subspaces are supplied for both sides, the Jaccard overlap between
    each truth subspace and its best match's subspace is reported too; it
    does not enter ``q``.
    """
    truth_org = [frozenset(c) for c in truth_org]
    detected = [frozenset(c) for c in detected]
    if not truth_org:
        raise ValueError("ground-truth organization is empty")
    best = []
    jac = []
    for i, t in enumerate(truth_org):
        score, match = 0.0, -1
        for j, d in enumerate(detected):
            s = f1(t, d)
            if s > score:
                score, match = s, j
        best.append((i, score, match))
        if truth_subspaces is not None and detected_subspaces is not None and match >= 0:
            a, b = set(truth_subspaces[i]), set(detected_subspaces[match])
            jac.append(len(a & b) / len(a | b))
    q = sum(s for _, s, _ in best) / len(best)
    return EvalReport(q, best, len(truth_org), len(detected), jac)
