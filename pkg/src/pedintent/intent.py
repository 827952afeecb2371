"""Crossing-intention estimation from contextual variables.

Twelve variables describe each pedestrian instant: the two estimated
ones (head orientation, motion) and ten annotated scene/demographic
ones. Binary variables encode to one column in {0, 1}, categorical ones
to a one-hot block in their declared token order, lane count stays
numeric. Variable selection is greedy forward at variable granularity:
a one-hot block enters or leaves as a unit, every candidate set is
scored by cross-validated error of a cubic-kernel SVM on one fixed fold
plan, so candidate scores within a run are paired.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import dataset as ds
from .errors import DataError
from .evalkit import cross_validate, kfold
from .learners import make_trainer

CROSSING_CLASSES = ds.CROSSING_VALUES  # ("crossing", "not_crossing")


@dataclass(frozen=True)
class VariableSpec:
    name: str
    encoding: str  # "binary" | "one_hot" | "numeric"
    tokens: tuple = ()

    @property
    def width(self):
        return len(self.tokens) if self.encoding == "one_hot" else 1


def variables(five_state_driver=False, lanes_onehot=False):
    """The 12 variable specs in their fixed declaration order.

    driver_action defaults to the four driving states; pass
    five_state_driver to also accept the stopped token. Lane count is
    ordinal by default; lanes_onehot switches it to six indicator
    columns.
    """
    driver = (ds.DRIVER_ACTION_VALUES_5 if five_state_driver
              else ds.DRIVER_ACTION_VALUES)
    lanes = (VariableSpec("lanes", "one_hot",
                          tuple(str(v) for v in range(ds.MIN_LANES,
                                                      ds.MAX_LANES + 1)))
             if lanes_onehot else VariableSpec("lanes", "numeric"))
    return (
        VariableSpec("head", "binary", ds.HEAD_VALUES),
        VariableSpec("motion", "binary", ds.MOTION_VALUES),
        VariableSpec("direction", "binary", ds.DIRECTION_VALUES),
        VariableSpec("driver_action", "one_hot", driver),
        VariableSpec("age", "one_hot", ds.AGE_VALUES),
        VariableSpec("gender", "binary", ds.GENDER_VALUES),
        lanes,
        VariableSpec("location", "one_hot", ds.LOCATION_VALUES),
        VariableSpec("signalized", "binary", ("false", "true")),
        VariableSpec("designed", "binary", ("false", "true")),
        VariableSpec("weather", "one_hot", ds.WEATHER_VALUES),
        VariableSpec("time_of_day", "binary", ds.TIME_OF_DAY_VALUES),
    )


VARIABLES = variables()
VARIABLES_5STATE = variables(five_state_driver=True)


@dataclass(frozen=True)
class IntentSample:
    """One labeled pedestrian instant, variables in raw token form."""
    head: str
    motion: str
    direction: str
    driver_action: str
    age: str
    gender: str
    lanes: int
    location: str
    signalized: bool
    designed: bool
    weather: str
    time_of_day: str
    crossing: str
    head_source: str = "ground_truth"  # or "predicted"
    motion_source: str = "ground_truth"
    sample_id: str = ""


def intent_samples(data, head_predictions=None, motion_predictions=None):
    """Collect IntentSamples from every pedestrian box with a crossing
    label. Estimated variables come from the prediction maps when given
    (falling back is an error: a missing id means the prediction file
    does not cover the intention subset)."""
    out = []
    for sid, s in data:
        if s.bbox.kind != "pedestrian" or s.crossing is None:
            continue
        head = s.behavior.head
        head_src = "ground_truth"
        if head_predictions is not None:
            try:
                head = head_predictions[sid]
            except KeyError:
                raise DataError("no head prediction for sample %r" % (sid,))
            head_src = "predicted"
        motion = s.behavior.motion
        motion_src = "ground_truth"
        if motion_predictions is not None:
            try:
                motion = motion_predictions[sid]
            except KeyError:
                raise DataError("no motion prediction for sample %r" % (sid,))
            motion_src = "predicted"
        out.append(IntentSample(
            head=head, motion=motion,
            direction=s.behavior.direction,
            driver_action=s.behavior.driver_action,
            age=s.demographics.age, gender=s.demographics.gender,
            lanes=s.scene.lanes, location=s.scene.location,
            signalized=s.scene.signalized, designed=s.scene.designed,
            weather=s.scene.weather, time_of_day=s.scene.time_of_day,
            crossing=s.crossing,
            head_source=head_src, motion_source=motion_src,
            sample_id=sid,
        ))
    return out


def _raw_value(sample, name):
    return getattr(sample, name)


def encode(sample, active):
    """Encode one sample over the active variables, concatenated in the
    given order. Unknown tokens are data errors naming the variable."""
    parts = []
    for var in active:
        value = _raw_value(sample, var.name)
        if var.encoding == "numeric":
            parts.append(float(value))
        elif var.encoding == "binary":
            token = ("true" if value else "false") if isinstance(value, bool) \
                else value
            if token not in var.tokens:
                raise DataError(
                    "variable %s: unknown token %r" % (var.name, token))
            parts.append(float(var.tokens.index(token)))
        else:
            token = value if isinstance(value, str) else str(value)
            if token not in var.tokens:
                raise DataError(
                    "variable %s: unknown token %r" % (var.name, token))
            block = [0.0] * len(var.tokens)
            block[var.tokens.index(token)] = 1.0
            parts.extend(block)
    return np.array(parts)


def encode_many(samples, active):
    if not samples:
        raise DataError("encode_many: no samples")
    return np.stack([encode(s, active) for s in samples])


def encoded_width(active):
    return sum(v.width for v in active)


def crossing_labels(samples):
    """Class indices: 0 = crossing (positive), 1 = not_crossing."""
    return np.array([CROSSING_CLASSES.index(s.crossing) for s in samples],
                    dtype=np.intp)


@dataclass
class IntentModel:
    classifier: object
    variables: tuple  # VariableSpec tuple the model was trained on
    cv_error: float


def _cv_error(samples, active, plan, seed):
    X = encode_many(samples, active)
    y = crossing_labels(samples)
    trainer = make_trainer("svm", seed=seed)
    _, acc, _ = cross_validate(trainer, X, y, plan)
    return 100.0 - acc


def train_intent(samples, active=VARIABLES, seed=0, folds=5):
    """Cross-validate then fit on everything; returns the final model
    with its CV error estimate."""
    if len(samples) < folds * 2:
        raise DataError("train_intent: too few samples")
    plan = kfold(len(samples), folds, seed)
    err = _cv_error(samples, active, plan, seed)
    X = encode_many(samples, active)
    y = crossing_labels(samples)
    clf = make_trainer("svm", seed=seed)(X, y)
    return IntentModel(clf, tuple(active), err)


def predict_crossing(model, samples, active=None):
    """Crossing labels for samples; the active set must be the one the
    model was trained on (None means use the model's own)."""
    if active is not None:
        if tuple(v.name for v in active) != tuple(v.name for v in model.variables):
            raise DataError(
                "active variables %r do not match the model's %r"
                % ([v.name for v in active], [v.name for v in model.variables]))
    X = encode_many(samples, model.variables)
    pred = model.classifier.predict(X)
    return [CROSSING_CLASSES[int(p)] for p in pred]


@dataclass(frozen=True)
class SelectionStep:
    step: int
    chosen: str
    selected: tuple  # names chosen so far, in order
    error: float
    candidate_errors: dict = field(hash=False, compare=False, default_factory=dict)


@dataclass
class SelectionTrace:
    steps: list

    @property
    def best_step(self):
        """First step reaching the minimum error."""
        errors = [s.error for s in self.steps]
        return int(np.argmin(errors)) + 1

    def names_at(self, step):
        return self.steps[step - 1].selected


def forward_select(samples, candidates=VARIABLES, seed=0, folds=5):
    """Greedy forward selection over whole variables.

    One fold plan is drawn up front and reused for every candidate
    evaluation, so scores differ only in the feature columns. At each
    step the candidate with the lowest cross-validated error joins the
    selection; ties resolve to the earlier variable in declared order.
    Runs until every variable is in, recording one step per addition.
    """
    if len(samples) < folds * 2:
        raise DataError("forward_select: too few samples")
    if len(candidates) < 2:
        raise DataError("forward_select: need at least 2 candidate variables")
    plan = kfold(len(samples), folds, seed)
    remaining = list(candidates)
    selected = []
    steps = []
    while remaining:
        scores = {}
        best_var = None
        best_err = np.inf
        for var in remaining:
            err = _cv_error(samples, selected + [var], plan, seed)
            scores[var.name] = err
            if err < best_err:  # strict keeps the earliest on ties
                best_err = err
                best_var = var
        selected.append(best_var)
        remaining.remove(best_var)
        steps.append(SelectionStep(
            step=len(selected), chosen=best_var.name,
            selected=tuple(v.name for v in selected),
            error=best_err, candidate_errors=scores,
        ))
    return SelectionTrace(steps)


def trace_to_csv(trace, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("step", "chosen", "selected_set", "error_pct"))
        for s in trace.steps:
            writer.writerow((s.step, s.chosen, " ".join(s.selected),
                             "%.6f" % s.error))


def render_trace(trace):
    """Aligned text table of the selection path."""
    lines = []
    w_name = max([len("added")] + [len(s.chosen) for s in trace.steps])
    lines.append("step  %s  cv_error  selected" % "added".ljust(w_name))
    lines.append("----  %s  --------  --------" % ("-" * w_name))
    for s in trace.steps:
        lines.append("%4d  %s  %8.3f  %s"
                     % (s.step, s.chosen.ljust(w_name), s.error,
                        ",".join(s.selected)))
    lines.append("")
    lines.append("best step: %d (%d variables, %.3f%% error)"
                 % (trace.best_step, trace.best_step,
                    trace.steps[trace.best_step - 1].error))
    return "\n".join(lines) + "\n"
