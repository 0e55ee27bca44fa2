from .models import (
    AvState,
    CameraCalibration,
    Centerline,
    Detection,
    GroundTruthCuboid,
    PedestrianState,
    SceneFrame,
)
from .dataset import (
    dump_detections,
    dump_scene,
    load_detections,
    load_scene,
    parse_frame,
    scene_to_dict,
)
