"""Synthetic clip generator for end-to-end runs.

Draws a small corpus of frames with one pedestrian box each. Visual cues
encode the behavior labels: a bright disc in the left or right half of
the head band (looking vs not_looking) and diagonal or vertical stripes
over the leg band (walking vs standing). Scene context and demographics
are drawn per clip, behavior per frame, and the crossing label follows
the rule crossing = walking and designed, with a fixed share of labels
flipped as noise. Everything derives from one seeded generator, so a
given (seed, clips, frames) triple always produces identical bytes.
"""

import os

import numpy as np
from PIL import Image

from . import dataset as ds
from .errors import DataError

FRAME_W = 208
FRAME_H = 272
NOISE_RATE = 0.10


def _draw_frame(rng, bbox, head_token, motion_token):
    img = rng.integers(30, 60, size=(FRAME_H, FRAME_W), dtype=np.int64)
    x, y, w, h = bbox.x, bbox.y, bbox.w, bbox.h
    third = h // 3
    # torso block
    img[y + third:y + h - third, x:x + w] = 110
    # head band: bright disc on the labeled side
    cx = x + w // 4 if head_token == "looking" else x + 3 * w // 4
    cy = y + third // 2
    r = max(3, w // 5)
    yy, xx = np.mgrid[y:y + third, x:x + w]
    disc = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    band = img[y:y + third, x:x + w]
    band[:] = 70
    band[disc] = 230
    # leg band: stripe orientation encodes motion
    yy, xx = np.mgrid[y + h - third:y + h, x:x + w]
    if motion_token == "walking":
        stripes = ((xx + yy) // 5) % 2 == 0
    else:
        stripes = (xx // 5) % 2 == 0
    legs = img[y + h - third:y + h, x:x + w]
    legs[:] = 60
    legs[stripes] = 210
    out = np.clip(img, 0, 255).astype(np.uint8)
    return np.repeat(out[:, :, None], 3, axis=2)


def generate_fixture(out_dir, n_clips=12, frames_per_clip=12, seed=0):
    """Write images/<clip>/<frame>.png plus annotations.tsv under out_dir.

    Returns the resulting Dataset. Frames per clip and the clip count
    must give both crossing labels a reasonable presence; tiny corpora
    are rejected.
    """
    if n_clips < 2 or frames_per_clip < 2:
        raise DataError("fixture needs at least 2 clips x 2 frames")
    rng = np.random.default_rng(seed)
    samples = []
    os.makedirs(out_dir, exist_ok=True)
    images_root = os.path.join(out_dir, "images")
    for c in range(n_clips):
        clip_id = "clip%03d" % c
        clip_dir = os.path.join(images_root, clip_id)
        os.makedirs(clip_dir, exist_ok=True)
        scene = ds.SceneContext(
            lanes=int(rng.integers(ds.MIN_LANES, ds.MAX_LANES + 1)),
            location=str(rng.choice(ds.LOCATION_VALUES)),
            signalized=bool(rng.random() < 0.5),
            designed=bool(rng.random() < 0.5),
            weather=str(rng.choice(ds.WEATHER_VALUES)),
            time_of_day=str(rng.choice(ds.TIME_OF_DAY_VALUES)),
        )
        demographics = ds.Demographics(
            age=str(rng.choice(ds.AGE_VALUES)),
            gender=str(rng.choice(ds.GENDER_VALUES)),
        )
        for f in range(frames_per_clip):
            w = int(rng.integers(45, 70))
            h = int(3 * rng.integers(40, 56))  # divisible by 3
            x = int(rng.integers(8, FRAME_W - w - 8))
            y = int(rng.integers(8, FRAME_H - h - 8))
            bbox = ds.BoundingBox(x, y, w, h, "pedestrian")
            head = str(rng.choice(ds.HEAD_VALUES))
            motion = str(rng.choice(ds.MOTION_VALUES))
            behavior = ds.BehaviorLabels(
                head=head, motion=motion,
                direction=str(rng.choice(ds.DIRECTION_VALUES)),
                driver_action=str(rng.choice(ds.DRIVER_ACTION_VALUES)),
            )
            crossing = (motion == "walking") and scene.designed
            if rng.random() < NOISE_RATE:
                crossing = not crossing
            frame = _draw_frame(rng, bbox, head, motion)
            Image.fromarray(frame).save(os.path.join(clip_dir, "%d.png" % f))
            samples.append(ds.PedestrianSample(
                clip_id=clip_id, frame_index=f, bbox=bbox, scene=scene,
                behavior=behavior, demographics=demographics,
                crossing="crossing" if crossing else "not_crossing",
            ))
    data = ds.Dataset(samples)
    ds.write_annotations(os.path.join(out_dir, "annotations.tsv"), data)
    return data


def frame_image_path(images_root, clip_id, frame_index):
    return os.path.join(images_root, clip_id, "%d.png" % frame_index)


def load_frame(images_root, clip_id, frame_index):
    """Frame as (h, w, 3) uint8; missing files are data errors."""
    path = frame_image_path(images_root, clip_id, frame_index)
    if not os.path.isfile(path):
        raise DataError("missing frame image %s" % (path,))
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
