"""Figure rendering for rate-region CSVs and verification reports."""

from .render import (
    RegionData,
    RegionFormatError,
    read_region_csv,
    render_region,
    render_verify_summary,
)

__all__ = [
    "RegionData",
    "RegionFormatError",
    "read_region_csv",
    "render_region",
    "render_verify_summary",
]

__version__ = "0.1.0"
