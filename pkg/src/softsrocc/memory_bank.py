"""Gradient-free memory of past predictions keyed by sample id.

Two dictionaries (id -> predicted score, id -> label) with per-entry epoch
stamps. At each step the current batch is merged with the remembered samples
so the monotonicity loss ranks against a much larger population than the
batch alone; only the current batch carries gradient.
"""

from dataclasses import dataclass
import math

import numpy as np

from .correlation import as_scores
from .errors import LabelConflict, LengthMismatch, NonFinite, ParseError
from .soft_rank import GradTaggedScores

LABEL_TOL = 1e-9
HEADER = "sample_id,pred,mos,epoch_stamp"


@dataclass
class BankEntry:
    score: float
    epoch_stamp: int


class MemoryBank:
    """Per-sample memory of detached predictions and their labels.

    ``retention_epochs`` (N) is the number of most recent epochs kept by
    :meth:`evict`. The bank is single-writer; :meth:`assemble` returns fresh
    arrays that share nothing with the bank.
    """

    def __init__(self, retention_epochs=1):
        if int(retention_epochs) < 1:
            raise ValueError("retention_epochs must be >= 1")
        self.retention_epochs = int(retention_epochs)
        self.predicted = {}
        self.ground_truth = {}

    def __len__(self):
        return len(self.predicted)

    def __contains__(self, sample_id):
        return sample_id in self.predicted

    def update(self, ids, preds, mos, epoch):
        """Overwrite predictions for ``ids`` and stamp them with ``epoch``.

        Labels are inserted on first sight and must match afterwards,
        otherwise LabelConflict is raised before anything is modified.
        """
        ids = [str(i) for i in ids]
        preds = np.asarray(preds, dtype=np.float64)
        mos = np.asarray(mos, dtype=np.float64)
        if not (len(ids) == preds.shape[0] == mos.shape[0]):
            raise LengthMismatch(f"{len(ids)} ids, {preds.shape[0]} preds, {mos.shape[0]} labels")
        if not (np.all(np.isfinite(preds)) and np.all(np.isfinite(mos))):
            raise NonFinite("bank updates must be finite")
        epoch = int(epoch)
        for sid, label in zip(ids, mos):
            old = self.ground_truth.get(sid)
            if old is not None and abs(old.score - label) > LABEL_TOL:
                raise LabelConflict(f"label for {sid!r} changed from {old.score!r} to {float(label)!r}")
        for sid, pred, label in zip(ids, preds, mos):
            prev = self.predicted.get(sid)
            stamp = epoch if prev is None else max(epoch, prev.epoch_stamp)
            self.predicted[sid] = BankEntry(float(pred), stamp)
            if sid in self.ground_truth:
                self.ground_truth[sid].epoch_stamp = stamp
            else:
                self.ground_truth[sid] = BankEntry(float(label), stamp)
        return self

    def evict(self, current_epoch):
        """Drop entries with ``epoch_stamp <= current_epoch - retention_epochs``."""
        cutoff = int(current_epoch) - self.retention_epochs
        stale = [sid for sid, e in self.predicted.items() if e.epoch_stamp <= cutoff]
        for sid in stale:
            del self.predicted[sid]
            del self.ground_truth[sid]
        return self

    def assemble(self, current_ids, current_preds, current_mos):
        """Merge the live batch with remembered samples.

        Returns ``(GradTaggedScores, mos)``. The current batch comes first,
        live and with its fresh predictions; then every bank entry whose id
        is not in the batch, as constants, in sorted id order.
        """
        current_ids = [str(i) for i in current_ids]
        preds = as_scores(current_preds, "current_preds")
        labels = as_scores(current_mos, "current_mos")
        if not (len(current_ids) == preds.shape[0] == labels.shape[0]):
            raise LengthMismatch("current batch ids, preds and labels differ in length")
        live = set(current_ids)
        rest = sorted(sid for sid in self.predicted if sid not in live)
        values = np.concatenate([preds, [self.predicted[s].score for s in rest]])
        mos = np.concatenate([labels, [self.ground_truth[s].score for s in rest]])
        mask = np.zeros(values.shape[0], dtype=bool)
        mask[: preds.shape[0]] = True
        return GradTaggedScores(values, mask, current_ids + rest), mos

    def snapshot(self):
        """Rows ``(id, pred, mos, epoch_stamp)`` in sorted id order."""
        return [
            (sid, self.predicted[sid].score, self.ground_truth[sid].score, self.predicted[sid].epoch_stamp)
            for sid in sorted(self.predicted)
        ]

    def dumps(self):
        lines = [HEADER]
        for sid, pred, mos, stamp in self.snapshot():
            lines.append(f"{sid},{pred:.17g},{mos:.17g},{stamp}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text, retention_epochs=1):
        bank = cls(retention_epochs)
        lines = text.splitlines()
        if not lines or lines[0].strip() != HEADER:
            raise ParseError(f"expected header {HEADER!r}", line=1)
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(f"expected 4 fields, got {len(parts)}", line=lineno)
            sid = parts[0]
            try:
                pred, mos, stamp = float(parts[1]), float(parts[2]), int(parts[3])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if not (math.isfinite(pred) and math.isfinite(mos)):
                raise ParseError("non-finite value", line=lineno)
            if sid in bank.predicted:
                raise ParseError(f"duplicate sample id {sid!r}", line=lineno)
            bank.predicted[sid] = BankEntry(pred, stamp)
            bank.ground_truth[sid] = BankEntry(mos, stamp)
        return bank

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path, retention_epochs=1):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read(), retention_epochs)
