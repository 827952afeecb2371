"""Cross-validation, ensemble evaluation and report rendering.

The evaluation protocol: shuffle the training samples into k folds,
train one model per held-out fold, validate each on its fold, then run
all k models on the untouched test side and average their accuracies
and row-normalized confusion matrices.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class FoldPlan:
    """fold_of[i] is the fold index of sample i; folds differ in size by
    at most one (the first n mod k folds are the larger ones)."""
    fold_of: np.ndarray
    k: int

    @property
    def n(self):
        return self.fold_of.size

    def val_indices(self, fold):
        return np.nonzero(self.fold_of == fold)[0]

    def train_indices(self, fold):
        return np.nonzero(self.fold_of != fold)[0]


def kfold(n, k=5, seed=0):
    """Seeded shuffle of range(n) cut into k contiguous chunks."""
    if k < 2 or k > n:
        raise DataError("kfold: need 2 <= k <= n")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    base = n // k
    extra = n % k
    fold_of = np.empty(n, dtype=np.intp)
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        fold_of[order[start:start + size]] = fold
        start += size
    return FoldPlan(fold_of, k)


def accuracy(predicted, actual):
    """Percent agreement."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape or predicted.size == 0:
        raise DataError("accuracy: shape mismatch or empty input")
    return 100.0 * float(np.mean(predicted == actual))


def confusion_matrix(predicted, actual, n_classes=2):
    """Row-normalized percentages: entry [i, j] is the share of true
    class i predicted as class j. A row with no true members is left
    as NaN, meaning undefined rather than zero."""
    predicted = np.asarray(predicted, dtype=np.intp)
    actual = np.asarray(actual, dtype=np.intp)
    if predicted.shape != actual.shape:
        raise DataError("confusion_matrix: shape mismatch")
    counts = np.zeros((n_classes, n_classes))
    for t, p in zip(actual, predicted):
        if not (0 <= t < n_classes and 0 <= p < n_classes):
            raise DataError("confusion_matrix: class index out of range")
        counts[t, p] += 1.0
    out = np.full((n_classes, n_classes), np.nan)
    for i in range(n_classes):
        row_n = counts[i].sum()
        if row_n > 0:
            out[i] = 100.0 * counts[i] / row_n
    return out


def cross_validate(trainer, X, y, plan):
    """Train one model per fold; returns (models, mean accuracy, per-fold).

    Every fold must hold both classes on both of its sides; the failing
    fold index is named otherwise.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if X.shape[0] != plan.n or y.size != plan.n:
        raise DataError("cross_validate: data does not match the fold plan")
    models = []
    fold_acc = []
    for fold in range(plan.k):
        tr = plan.train_indices(fold)
        va = plan.val_indices(fold)
        for name, part in (("training", tr), ("validation", va)):
            if np.unique(y[part]).size < 2:
                raise DataError(
                    "cross_validate: fold %d has a single-class %s side"
                    % (fold, name)
                )
        model = trainer(X[tr], y[tr])
        models.append(model)
        fold_acc.append(accuracy(model.predict(X[va]), y[va]))
    return models, float(np.mean(fold_acc)), fold_acc


@dataclass
class EvalReport:
    task: str
    feature: str
    classifier: str
    accuracy: float
    confusion: np.ndarray
    member_accuracies: list
    cv_accuracy: float
    class_names: tuple
    extra: dict = field(default_factory=dict)


def evaluate_ensemble(models, X_test, y_test, task="", feature="",
                      classifier="", cv_accuracy=float("nan"),
                      class_names=("positive", "negative")):
    """Average the per-model test accuracies and confusion matrices.

    All models see the same test set, so undefined confusion rows are
    undefined for every member and stay NaN in the average instead of
    being silently zeroed.
    """
    if not models:
        raise DataError("evaluate_ensemble: no models")
    X_test = np.asarray(X_test, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.intp)
    if X_test.shape[0] != y_test.size or y_test.size == 0:
        raise DataError("evaluate_ensemble: empty or mismatched test set")
    accs = []
    confusions = []
    for model in models:
        pred = model.predict(X_test)
        accs.append(accuracy(pred, y_test))
        confusions.append(confusion_matrix(pred, y_test))
    return EvalReport(
        task=task, feature=feature, classifier=classifier,
        accuracy=float(np.mean(accs)),
        confusion=np.mean(confusions, axis=0),
        member_accuracies=accs,
        cv_accuracy=cv_accuracy,
        class_names=class_names,
    )


def majority_vote(models, X):
    """Per-sample majority class over an ensemble (ties to lower index)."""
    if not models:
        raise DataError("majority_vote: no models")
    votes = np.stack([np.asarray(m.predict(X), dtype=np.intp) for m in models])
    n_classes = int(votes.max()) + 1 if votes.size else 2
    counts = np.apply_along_axis(
        lambda col: np.bincount(col, minlength=max(2, n_classes)), 0, votes)
    return np.argmax(counts, axis=0)


_CSV_FIELDS = ("task", "feature", "classifier", "test_accuracy",
               "cv_accuracy", "conf_00", "conf_01", "conf_10", "conf_11",
               "member_accuracies", "class_0", "class_1")


def reports_to_csv(reports, path):
    """One row per report; confusion cells that are undefined stay blank."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for r in reports:
            cells = []
            for i in (0, 1):
                for j in (0, 1):
                    v = r.confusion[i, j]
                    cells.append("" if np.isnan(v) else "%.6f" % v)
            writer.writerow([
                r.task, r.feature, r.classifier,
                "%.6f" % r.accuracy, "%.6f" % r.cv_accuracy,
                *cells,
                " ".join("%.6f" % a for a in r.member_accuracies),
                r.class_names[0], r.class_names[1],
            ])


def reports_from_csv(path):
    reports = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != _CSV_FIELDS:
        raise DataError("%s: not a results file" % (path,))
    for row in rows[1:]:
        if len(row) != len(_CSV_FIELDS):
            raise DataError("%s: malformed row" % (path,))
        conf = np.full((2, 2), np.nan)
        for idx, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            cell = row[5 + idx]
            if cell:
                conf[i, j] = float(cell)
        reports.append(EvalReport(
            task=row[0], feature=row[1], classifier=row[2],
            accuracy=float(row[3]), cv_accuracy=float(row[4]),
            confusion=conf,
            member_accuracies=[float(t) for t in row[9].split()] if row[9] else [],
            class_names=(row[10], row[11]),
        ))
    return reports


def render_grid(reports):
    """Aligned text table: classifiers as rows, task/feature pairs as
    columns, mean test accuracy in the cells."""
    columns = []
    for r in reports:
        key = (r.task, r.feature)
        if key not in columns:
            columns.append(key)
    classifiers = []
    for r in reports:
        if r.classifier not in classifiers:
            classifiers.append(r.classifier)
    cell = {(r.classifier, (r.task, r.feature)): r.accuracy for r in reports}
    headers = ["%s/%s" % c for c in columns]
    width0 = max([len("classifier")] + [len(c) for c in classifiers])
    widths = [max(len(h), 8) for h in headers]
    lines = []
    lines.append("  ".join(["classifier".ljust(width0)]
                           + [h.rjust(w) for h, w in zip(headers, widths)]))
    lines.append("  ".join(["-" * width0] + ["-" * w for w in widths]))
    for cls in classifiers:
        row = [cls.ljust(width0)]
        for key, w in zip(columns, widths):
            v = cell.get((cls, key))
            row.append(("%.2f" % v if v is not None else "--").rjust(w))
        lines.append("  ".join(row))
    return "\n".join(lines) + "\n"


def render_confusion(report):
    """Aligned 2x2 confusion block with class names; NaN prints as --."""
    names = report.class_names
    width = max(len(n) for n in names) + 2
    lines = ["%s (%s + %s)" % (report.classifier or "model",
                               report.task or "task",
                               report.feature or "feature")]
    header = " " * width + "".join(("pred " + n).rjust(width + 6) for n in names)
    lines.append(header)
    for i, n in enumerate(names):
        cells = []
        for j in range(2):
            v = report.confusion[i, j]
            cells.append(("--" if np.isnan(v) else "%.2f" % v).rjust(width + 6))
        lines.append(("true " + n).ljust(width) + "".join(cells))
    return "\n".join(lines) + "\n"
