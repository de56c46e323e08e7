"""Action-aware extraction of coding steps from programming screencasts.

The pipeline turns a sampled frame sequence into line-granularity editing
steps: consecutive frames are diffed into change regions, each changed
pair is classified as a primitive HCI action, on-screen text is detected
and merged into lines, and continual coding-related actions on one text
line are aggregated into typed steps (enter / delete / edit / select
text). An evaluation layer scores extracted steps against ground truth
with fragment-IoU and time-offset threshold sweeps, and a synthesizer
renders scripted editing sessions with exact ground truth for testing.
"""

from .actions import (
    ActionCategory,
    ActionEvent,
    ActionType,
    HeuristicActionBackend,
    SidecarActionBackend,
    category_of,
    load_precomputed_actions,
    recognize_action,
)
from .changes import ChangeRegion, diff_region
from .errors import (
    BoundsError,
    DecodeError,
    DimensionMismatch,
    DuplicateEvent,
    InputError,
    InvalidFragmentList,
    InvalidSpan,
    InvariantError,
    MissingFrame,
    MissingLines,
    NotOverlapping,
    ParamError,
    ScriptError,
    SeeflowError,
    SidecarFormatError,
    UnknownAction,
)
from .evaluation import (
    EvaluationReport,
    FragmentMatch,
    GroundTruthStep,
    LengthStats,
    TrailerStats,
    evaluate,
    fragment_iou,
    match_fragments,
    read_gt_jsonl,
    score,
    sweep,
    time_offset,
    trailer_stats,
    write_gt_jsonl,
)
from .frames import (
    Frame,
    FrameSequence,
    load_frame_sequence,
    sequence_from_arrays,
    write_frame_sequence,
)
from .pipeline import ExtractionResult, PipelineConfig, extract_steps
from .steps import (
    ActiveLines,
    CodingStep,
    StepType,
    identify_steps,
    locate_active_lines,
    read_steps_jsonl,
    vertical_overlap,
    write_steps_jsonl,
)
from .synth import (
    RandomScriptParams,
    SessionScript,
    SynthResult,
    generate_random_script,
    read_script,
    render_session,
    write_script,
)
from .textlines import (
    LineMatching,
    RasterTextBackend,
    SidecarTextBackend,
    TextLine,
    WordBox,
    extract_lines,
    line_similarity,
    longest_common_substring_length,
    match_text_lines,
    merge_word_boxes,
)

__version__ = "0.1.0"
