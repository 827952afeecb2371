"""Annotation records, the line-based annotation format, crops and splits.

Annotation files are UTF-8 text, one record per line, fields separated by
a single tab, `#` starts a comment line. Field order:

    clip_id frame_index x y w h kind
    head motion direction driver_action age gender
    lanes location signalized designed weather time_of_day crossing

`kind` is pedestrian, bystander or group. The six behavior/demographic
fields and `crossing` take the placeholder `-` on non-pedestrian rows
(and `crossing` may be `-` on pedestrian rows without a crossing label).
Booleans are written true/false. Sample ids are `clip_frame_k` with k the
ordinal of the box within its frame.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

KINDS = ("pedestrian", "bystander", "group")

HEAD_VALUES = ("looking", "not_looking")
MOTION_VALUES = ("walking", "standing")
DIRECTION_VALUES = ("lateral", "longitudinal")
DRIVER_ACTION_VALUES = ("moving_fast", "moving_slow", "slowing_down", "speeding_up")
DRIVER_ACTION_VALUES_5 = DRIVER_ACTION_VALUES + ("stopped",)
AGE_VALUES = ("child", "young", "adult", "senior")
GENDER_VALUES = ("male", "female")
LOCATION_VALUES = ("street", "indoor", "plaza")
WEATHER_VALUES = ("clear", "cloudy", "rain", "snow")
TIME_OF_DAY_VALUES = ("day", "night")
CROSSING_VALUES = ("crossing", "not_crossing")

MIN_LANES, MAX_LANES = 1, 6


@dataclass(frozen=True)
class BoundingBox:
    x: int
    y: int
    w: int
    h: int
    kind: str

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise DataError("bounding box must have positive size")
        if self.kind not in KINDS:
            raise DataError("unknown box kind %r" % (self.kind,))


@dataclass(frozen=True)
class BehaviorLabels:
    head: str
    motion: str
    direction: str
    driver_action: str


@dataclass(frozen=True)
class Demographics:
    age: str
    gender: str


@dataclass(frozen=True)
class SceneContext:
    lanes: int
    location: str
    signalized: bool
    designed: bool
    weather: str
    time_of_day: str


@dataclass(frozen=True)
class PedestrianSample:
    clip_id: str
    frame_index: int
    bbox: BoundingBox
    scene: SceneContext
    behavior: BehaviorLabels | None = None
    demographics: Demographics | None = None
    crossing: str | None = None

    def __post_init__(self):
        is_ped = self.bbox.kind == "pedestrian"
        if is_ped and (self.behavior is None or self.demographics is None):
            raise DataError("pedestrian boxes need behavior and demographics")
        if not is_ped and (self.behavior is not None
                           or self.demographics is not None
                           or self.crossing is not None):
            raise DataError(
                "behavior, demographics and crossing apply only to pedestrians"
            )


@dataclass
class Dataset:
    samples: list
    ids: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        counters = {}
        ids = []
        for s in self.samples:
            key = (s.clip_id, s.frame_index, s.bbox)
            if key in seen:
                raise DataError(
                    "duplicate annotation: clip %s frame %d box (%d,%d,%d,%d)"
                    % (s.clip_id, s.frame_index,
                       s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h)
                )
            seen.add(key)
            fkey = (s.clip_id, s.frame_index)
            k = counters.get(fkey, 0)
            counters[fkey] = k + 1
            ids.append("%s_%d_%d" % (s.clip_id, s.frame_index, k))
        self.ids = ids
        self._by_id = dict(zip(ids, self.samples))

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(zip(self.ids, self.samples))

    def get(self, sample_id):
        try:
            return self._by_id[sample_id]
        except KeyError:
            raise DataError("unknown sample id %r" % (sample_id,))

    def clip_ids(self):
        return sorted({s.clip_id for s in self.samples})


def _parse_int(token, name, lineno, low=None, high=None):
    try:
        value = int(token)
    except ValueError:
        raise DataError("line %d: field %s: %r is not an integer"
                        % (lineno, name, token))
    if low is not None and value < low:
        raise DataError("line %d: field %s: %d below %d" % (lineno, name, value, low))
    if high is not None and value > high:
        raise DataError("line %d: field %s: %d above %d" % (lineno, name, value, high))
    return value


def _parse_enum(token, name, values, lineno):
    if token not in values:
        raise DataError(
            "line %d: field %s: %r not one of %s"
            % (lineno, name, token, "/".join(values))
        )
    return token


def _parse_bool(token, name, lineno):
    if token == "true":
        return True
    if token == "false":
        return False
    raise DataError("line %d: field %s: %r is not true/false" % (lineno, name, token))


_N_FIELDS = 20


def load_annotations(path):
    """Parse an annotation file into a Dataset.

    Any malformed line (wrong field count, bad integer, token outside its
    value set, placeholder misuse, duplicate record) rejects the whole
    file with the line number and field named. driver_action accepts all
    five states here; the narrower four-state set is an encoding choice
    made downstream.
    """
    samples = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read annotations %s: %s" % (path, exc))
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != _N_FIELDS:
                raise DataError(
                    "line %d: expected %d fields, got %d"
                    % (lineno, _N_FIELDS, len(fields))
                )
            (clip_id, frame_s, x_s, y_s, w_s, h_s, kind,
             head, motion, direction, driver, age, gender,
             lanes_s, location, signal_s, designed_s, weather,
             tod, crossing) = fields
            if not clip_id:
                raise DataError("line %d: field clip_id: empty" % (lineno,))
            frame = _parse_int(frame_s, "frame_index", lineno, low=0)
            x = _parse_int(x_s, "x", lineno)
            y = _parse_int(y_s, "y", lineno)
            w = _parse_int(w_s, "w", lineno, low=1)
            h = _parse_int(h_s, "h", lineno, low=1)
            kind = _parse_enum(kind, "kind", KINDS, lineno)
            bbox = BoundingBox(x, y, w, h, kind)
            scene = SceneContext(
                lanes=_parse_int(lanes_s, "lanes", lineno, MIN_LANES, MAX_LANES),
                location=_parse_enum(location, "location", LOCATION_VALUES, lineno),
                signalized=_parse_bool(signal_s, "signalized", lineno),
                designed=_parse_bool(designed_s, "designed", lineno),
                weather=_parse_enum(weather, "weather", WEATHER_VALUES, lineno),
                time_of_day=_parse_enum(tod, "time_of_day", TIME_OF_DAY_VALUES, lineno),
            )
            if kind == "pedestrian":
                behavior = BehaviorLabels(
                    head=_parse_enum(head, "head", HEAD_VALUES, lineno),
                    motion=_parse_enum(motion, "motion", MOTION_VALUES, lineno),
                    direction=_parse_enum(direction, "direction",
                                          DIRECTION_VALUES, lineno),
                    driver_action=_parse_enum(driver, "driver_action",
                                              DRIVER_ACTION_VALUES_5, lineno),
                )
                demographics = Demographics(
                    age=_parse_enum(age, "age", AGE_VALUES, lineno),
                    gender=_parse_enum(gender, "gender", GENDER_VALUES, lineno),
                )
                cross = None if crossing == "-" else _parse_enum(
                    crossing, "crossing", CROSSING_VALUES, lineno)
            else:
                for name, token in (("head", head), ("motion", motion),
                                    ("direction", direction),
                                    ("driver_action", driver), ("age", age),
                                    ("gender", gender), ("crossing", crossing)):
                    if token != "-":
                        raise DataError(
                            "line %d: field %s: %r given for kind %s (use `-`)"
                            % (lineno, name, token, kind)
                        )
                behavior = None
                demographics = None
                cross = None
            try:
                samples.append(PedestrianSample(
                    clip_id=clip_id, frame_index=frame, bbox=bbox, scene=scene,
                    behavior=behavior, demographics=demographics, crossing=cross,
                ))
            except DataError as exc:
                raise DataError("line %d: %s" % (lineno, exc))
    try:
        return Dataset(samples)
    except DataError as exc:
        raise DataError("%s: %s" % (path, exc))


def write_annotations(path, dataset):
    """Inverse of load_annotations (used by the fixture generator)."""
    def fmt_bool(b):
        return "true" if b else "false"

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# clip_id frame x y w h kind head motion direction"
                 " driver_action age gender lanes location signalized"
                 " designed weather time_of_day crossing\n")
        for _, s in dataset:
            beh = s.behavior
            dem = s.demographics
            fields = [
                s.clip_id, str(s.frame_index),
                str(s.bbox.x), str(s.bbox.y), str(s.bbox.w), str(s.bbox.h),
                s.bbox.kind,
                beh.head if beh else "-",
                beh.motion if beh else "-",
                beh.direction if beh else "-",
                beh.driver_action if beh else "-",
                dem.age if dem else "-",
                dem.gender if dem else "-",
                str(s.scene.lanes), s.scene.location,
                fmt_bool(s.scene.signalized), fmt_bool(s.scene.designed),
                s.scene.weather, s.scene.time_of_day,
                s.crossing if s.crossing else "-",
            ]
            fh.write("\t".join(fields) + "\n")


def crop_region(image, bbox, part):
    """Cut the head, legs or full region of a box out of an (h, w, ...) array.

    head is the top floor(h/3) rows of the box, legs the bottom floor(h/3),
    both at least one row tall and full box width. The result is clipped to
    the image; an empty intersection is an error.
    """
    if part not in ("head", "legs", "full"):
        raise DataError("unknown crop part %r" % (part,))
    img_h, img_w = image.shape[:2]
    third = max(1, bbox.h // 3)
    if part == "head":
        r0, r1 = bbox.y, bbox.y + third
    elif part == "legs":
        r0, r1 = bbox.y + bbox.h - third, bbox.y + bbox.h
    else:
        r0, r1 = bbox.y, bbox.y + bbox.h
    c0, c1 = bbox.x, bbox.x + bbox.w
    r0, r1 = max(r0, 0), min(r1, img_h)
    c0, c1 = max(c0, 0), min(c1, img_w)
    if r0 >= r1 or c0 >= c1:
        raise DataError(
            "box (%d,%d,%d,%d) %s region lies outside the %dx%d image"
            % (bbox.x, bbox.y, bbox.w, bbox.h, part, img_w, img_h)
        )
    return image[r0:r1, c0:c1].copy()


@dataclass(frozen=True)
class Split:
    train: tuple
    test: tuple
    method: str
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "test", tuple(self.test))
        if set(self.train) & set(self.test):
            raise DataError("split sides overlap")


def _round_half_up(x):
    # avoids float dust just under .5 boundaries (0.6*5 style products)
    return int(math.floor(x + 0.5 + 1e-9))


def split_by_clip(dataset, train_fraction, seed):
    """Disjoint train/test at clip granularity.

    ceil(train_fraction * n_clips) clips go to train, chosen by a seeded
    permutation of the sorted clip ids.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train fraction must be in (0, 1)")
    clips = dataset.clip_ids()
    n = len(clips)
    if n < 2:
        raise DataError("clip split needs at least 2 clips")
    target = train_fraction * n
    n_train = int(math.ceil(target - 1e-9))
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    train_clips = {clips[i] for i in order[:n_train]}
    train = [sid for sid, s in dataset if s.clip_id in train_clips]
    test = [sid for sid, s in dataset if s.clip_id not in train_clips]
    return Split(train, test, "A_by_clip", seed)


def split_by_frame(dataset, train_fraction, seed):
    """Per-clip frame split: round(train_fraction * n_frames) half-up,
    at least 1, to train. Every box of a frame stays on one side."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train fraction must be in (0, 1)")
    by_clip = {}
    for _, s in dataset:
        by_clip.setdefault(s.clip_id, set()).add(s.frame_index)
    rng = np.random.default_rng(seed)
    train_keys = set()
    for clip in sorted(by_clip):
        frames = sorted(by_clip[clip])
        n = len(frames)
        n_train = min(n, max(1, _round_half_up(train_fraction * n)))
        order = rng.permutation(n)
        train_keys.update((clip, frames[i]) for i in order[:n_train])
    train = [sid for sid, s in dataset if (s.clip_id, s.frame_index) in train_keys]
    test = [sid for sid, s in dataset if (s.clip_id, s.frame_index) not in train_keys]
    return Split(train, test, "B_by_frame", seed)


def balance_classes(items, labels, seed):
    """Subset `items` so both label values occur equally often.

    The majority class is downsampled by seeded choice without
    replacement; surviving items keep their original relative order.
    """
    if len(items) != len(labels):
        raise DataError("items and labels differ in length")
    values = sorted(set(labels))
    if len(values) != 2:
        raise DataError(
            "balancing needs exactly 2 label values, got %d" % (len(values),)
        )
    idx = {v: [i for i, lab in enumerate(labels) if lab == v] for v in values}
    n_min = min(len(idx[values[0]]), len(idx[values[1]]))
    rng = np.random.default_rng(seed)
    keep = set()
    for v in values:
        members = idx[v]
        if len(members) == n_min:
            keep.update(members)
        else:
            chosen = rng.choice(len(members), size=n_min, replace=False)
            keep.update(members[i] for i in chosen)
    return [items[i] for i in sorted(keep)]
