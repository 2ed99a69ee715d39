"""avasym: find and fix audio/visual accessibility gaps in videos.

The pipeline segments both tracks, scores how well each segment is grounded
in the other modality, filters known false positives, and hands the result to
an authoring service where descriptions and captions are written, previewed,
and exported.
"""

__version__ = "0.1.0"
