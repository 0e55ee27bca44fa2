"""
Module: Scene and Detection Files

Reads and writes the JSON scene format (top-level ``frames`` array) and the
detection format (top-level array of detection records). See
``docs/formats.md``.
"""

import json
import logging
from pathlib import Path

from pydantic import ValidationError

from dataset.models import Detection, SceneFrame
from errors import DetectionFormatError, SceneFormatError, SceneValidationError

logger = logging.getLogger(__name__)


def _read_json(path, error_cls):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise error_cls(path, "file does not exist") from exc
    except UnicodeDecodeError as exc:
        raise error_cls(path, f"not valid UTF-8 at byte {exc.start}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise error_cls(path, exc.msg, line=exc.lineno, column=exc.colno) from exc


def _field_locus(error: ValidationError) -> tuple:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "<frame>"
    return field, first["msg"]


def parse_frame(raw: dict, index: int = 0) -> SceneFrame:
    """
    Validate one raw frame mapping.

    Raises:
        SceneValidationError: naming the frame_id and the offending field.
    """
    frame_id = raw.get("frame_id", f"#{index}") if isinstance(raw, dict) else f"#{index}"
    try:
        return SceneFrame.model_validate(raw)
    except ValidationError as exc:
        field, message = _field_locus(exc)
        raise SceneValidationError(frame_id, field, message) from exc


def load_scene(path) -> list:
    """
    Load a scene file.

    Returns:
        list[SceneFrame]: frames ordered by timestamp.
    """
    data = _read_json(path, SceneFormatError)
    if not isinstance(data, dict) or not isinstance(data.get("frames"), list):
        raise SceneFormatError(path, "expected an object with a 'frames' array")

    frames = [parse_frame(raw, i) for i, raw in enumerate(data["frames"])]
    frame_ids = [f.frame_id for f in frames]
    if len(frame_ids) != len(set(frame_ids)):
        raise SceneFormatError(path, "frame_id values must be unique")

    frames.sort(key=lambda f: f.timestamp)
    logger.debug("loaded scene", extra={"path": str(path), "frames": len(frames)})
    return frames


def scene_to_dict(frames) -> dict:
    return {"frames": [f.model_dump(mode="json", by_alias=True) for f in frames]}


def dump_scene(frames, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(frames), indent=2) + "\n", encoding="utf-8")


def load_detections(path) -> list:
    """
    Load a detection file, preserving record order.

    Returns:
        list[Detection]
    """
    data = _read_json(path, DetectionFormatError)
    if not isinstance(data, list):
        raise DetectionFormatError(path, "expected a top-level array of detections")

    detections = []
    for i, raw in enumerate(data):
        try:
            detections.append(Detection.model_validate(raw))
        except ValidationError as exc:
            field, message = _field_locus(exc)
            raise DetectionFormatError(path, f"detection [{i}].{field}: {message}") from exc
    return detections


def dump_detections(detections, path) -> None:
    records = [d.model_dump(mode="json", by_alias=True) for d in detections]
    Path(path).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
