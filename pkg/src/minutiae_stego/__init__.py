"""Data hiding in fingerprint minutiae templates."""

from .codec import (
    BitPayload,
    CapacityError,
    EmbedConfig,
    EmbedError,
    EmbedReport,
    FrameError,
    capacity,
    embed_bytes,
    embed_element_optimized,
    embed_element_plain,
    embed_template,
    extract_bytes,
    extract_template,
    frame_payload,
    order_adjust,
    unframe_payload,
)
from .matcher import BACKEND, MatchParams, MatchResult, angle_diff, match_templates
from .template import (
    MinutiaeTemplate,
    MinutiaPoint,
    TemplateError,
    parse_binary,
    parse_text,
    serialize_binary,
    serialize_text,
)

__version__ = "0.1.0"
