"""
Path schemas
JSON form of a piecewise-linear regulation triple (zdot is derived from R)
"""

from pydantic import BaseModel, Field
from typing import List


class SegmentPayload(BaseModel):
    T: float = Field(..., gt=0, description="Segment duration")
    xdot: List[float] = Field(..., min_length=3, max_length=3)
    ydot: List[float] = Field(..., min_length=3, max_length=3)


class PathPayload(BaseModel):
    origin: List[float] = Field(..., min_length=3, max_length=3)
    segments: List[SegmentPayload] = []


__all__ = ["SegmentPayload", "PathPayload"]
