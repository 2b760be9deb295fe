"""Dataset ingestion, landmark maps, clustering and the toy-face generator."""

from .clustering import (
    ShapeSet,
    StyleReferenceSet,
    assign_shape_cluster,
    cluster_shapes,
    cluster_styles,
    extract_style_feature,
)
from .io import (
    CariSample,
    PhotoSample,
    load_caricature_dataset,
    load_photo_dataset,
    read_image_png,
    read_label_png,
    read_landmarks_txt,
    write_image_png,
    write_label_png,
    write_landmarks_txt,
)
from .landmarks import (
    KIND_POLYLINE,
    KIND_REGION,
    NUM_LANDMARKS,
    LandmarkGroup,
    LandmarkGrouping,
    bresenham,
    default_grouping,
    format_grouping,
    grouping_sha256,
    load_grouping,
    parse_grouping,
    rasterize_landmark_map,
    save_grouping,
)
from .toy import generate_toy_face_dataset, render_face, toy_face_sample

__all__ = [
    "CariSample",
    "KIND_POLYLINE",
    "KIND_REGION",
    "LandmarkGroup",
    "LandmarkGrouping",
    "NUM_LANDMARKS",
    "PhotoSample",
    "ShapeSet",
    "StyleReferenceSet",
    "assign_shape_cluster",
    "bresenham",
    "cluster_shapes",
    "cluster_styles",
    "default_grouping",
    "extract_style_feature",
    "format_grouping",
    "generate_toy_face_dataset",
    "grouping_sha256",
    "load_caricature_dataset",
    "load_grouping",
    "load_photo_dataset",
    "parse_grouping",
    "rasterize_landmark_map",
    "read_image_png",
    "read_label_png",
    "read_landmarks_txt",
    "render_face",
    "save_grouping",
    "toy_face_sample",
    "write_image_png",
    "write_label_png",
    "write_landmarks_txt",
]
