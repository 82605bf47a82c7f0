"""Line-oriented correspondence file format.

::

    META focal <f> cx <cx> cy <cy> readout <seconds> height <rows>
    IMU1 gx gy gz wx wy wz
    IMU2 gx gy gz wx wy wz
    CORR u1 v1 u2 v2        # pixel coordinates, one line per match

UTF-8, ``#`` starts a comment, blank lines ignored. META/IMU1/IMU2 must
appear once each in that order before the CORR lines. Parse errors carry
the offending line number.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CameraIntrinsics,
    Correspondence,
    InertialMeasurement,
    denormalize_point,
    normalize_pixel,
)


class CorrespondenceFileError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass
class ProblemInput:
    """One externally supplied relative-pose problem."""

    intrinsics: CameraIntrinsics
    imu1: InertialMeasurement
    imu2: InertialMeasurement
    correspondences: list[Correspondence]


def _parse_floats(tokens: list[str], n: int, lineno: int,
                  what: str) -> list[float]:
    if len(tokens) != n:
        raise CorrespondenceFileError(
            lineno, f"{what} expects {n} values, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise CorrespondenceFileError(lineno, f"bad number in {what}: {exc}")


def parse_problem(text: str) -> ProblemInput:
    meta = None
    imu = {}
    corr_pixels = []
    expected = ["META", "IMU1", "IMU2"]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        if tag in ("META", "IMU1", "IMU2"):
            if not expected or tag != expected[0]:
                raise CorrespondenceFileError(
                    lineno, f"unexpected {tag} line"
                    + (f" (expected {expected[0]})" if expected else ""))
            expected.pop(0)
            if tag == "META":
                kv = dict(zip(rest[0::2], rest[1::2]))
                needed = ["focal", "cx", "cy", "readout", "height"]
                if sorted(kv) != sorted(needed) or len(rest) != 10:
                    raise CorrespondenceFileError(
                        lineno, "META expects 'focal <f> cx <cx> cy <cy> "
                        "readout <s> height <rows>'")
                vals = _parse_floats([kv[k] for k in needed], 5, lineno,
                                     "META")
                meta = CameraIntrinsics(
                    focal=vals[0], cx=vals[1], cy=vals[2],
                    width=int(round(2 * vals[1])) or 1,
                    height=int(vals[4]), readout=vals[3])
            else:
                vals = _parse_floats(rest, 6, lineno, tag)
                imu[tag] = InertialMeasurement(
                    gravity=np.array(vals[:3]),
                    angular_velocity=np.array(vals[3:]))
        elif tag == "CORR":
            if expected:
                raise CorrespondenceFileError(
                    lineno, f"CORR before {expected[0]} line")
            vals = _parse_floats(rest, 4, lineno, "CORR")
            corr_pixels.append((lineno, vals))
        else:
            raise CorrespondenceFileError(lineno, f"unknown tag {tag!r}")
    if expected:
        last = text.count("\n") + 1
        raise CorrespondenceFileError(last, f"missing {expected[0]} line")
    corrs = []
    for lineno, (u1, v1, u2, v2) in corr_pixels:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # out-of-bounds pixels allowed
            corrs.append(Correspondence(
                p1=normalize_pixel((u1, v1), meta),
                p2=normalize_pixel((u2, v2), meta)))
    return ProblemInput(intrinsics=meta, imu1=imu["IMU1"], imu2=imu["IMU2"],
                        correspondences=corrs)


def load_problem(path) -> ProblemInput:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def format_problem(problem: ProblemInput) -> str:
    intr = problem.intrinsics

    def nums(*vals):
        # plain-float repr round-trips exactly and is locale-independent
        return " ".join(repr(float(v)) for v in vals)

    lines = [
        f"META focal {nums(intr.focal)} cx {nums(intr.cx)} "
        f"cy {nums(intr.cy)} readout {nums(intr.readout)} "
        f"height {intr.height}",
    ]
    for tag, m in (("IMU1", problem.imu1), ("IMU2", problem.imu2)):
        lines.append(f"{tag} {nums(*m.gravity)} {nums(*m.angular_velocity)}")
    for c in problem.correspondences:
        p1 = denormalize_point(c.p1.m, intr)
        p2 = denormalize_point(c.p2.m, intr)
        lines.append(f"CORR {nums(p1[0], p1[1], p2[0], p2[1])}")
    return "\n".join(lines) + "\n"


def save_problem(problem: ProblemInput, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_problem(problem))
