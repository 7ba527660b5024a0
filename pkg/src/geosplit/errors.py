"""Exception types shared across the package."""

from __future__ import annotations


class GeosplitError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GeosplitError):
    def __init__(self, line: int, field: str, message: str):
        self.line = line
        self.field = field
        super().__init__(f"line {line}, field '{field}': {message}")


class DuplicateIdError(GeosplitError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id '{sample_id}'")


class NonMonotoneTimeError(GeosplitError):
    def __init__(self, sequence_id: str, line: int):
        self.sequence_id = sequence_id
        self.line = line
        super().__init__(
            f"timestamps not strictly increasing in sequence '{sequence_id}' (line {line})"
        )


class MissingConfidenceError(GeosplitError):
    def __init__(self, frame_id: str):
        self.frame_id = frame_id
        super().__init__(f"prediction element in frame '{frame_id}' lacks confidence")


class DegeneratePolylineError(GeosplitError):
    def __init__(self, frame_id: str, message: str):
        self.frame_id = frame_id
        super().__init__(f"degenerate polyline in frame '{frame_id}': {message}")


class UnknownSampleIdError(GeosplitError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"unknown sample id '{sample_id}'")


class UnknownMapError(GeosplitError):
    def __init__(self, map_id: str):
        self.map_id = map_id
        super().__init__(f"unknown map '{map_id}'")


class InvalidPolygonError(GeosplitError):
    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(f"invalid polygon for region '{name}': {message}")


class InfeasibleLockError(GeosplitError):
    def __init__(self, set_name: str, locked_fraction: float, target: float):
        self.set_name = set_name
        self.locked_fraction = locked_fraction
        self.target = target
        super().__init__(
            f"locked samples fix {locked_fraction:.3f} of the data to '{set_name}', "
            f"more than target {target:.3f} + 0.10"
        )


class OverlappingMapsError(GeosplitError):
    def __init__(self, fold_name: str, maps: set[str]):
        self.fold_name = fold_name
        self.maps = maps
        super().__init__(
            f"fold '{fold_name}' lists maps in both train and val: {sorted(maps)}"
        )


class ShapeMismatchError(GeosplitError):
    def __init__(self, a_shape, b_shape):
        super().__init__(f"mask shapes differ: {a_shape} vs {b_shape}")
