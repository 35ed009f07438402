"""sketchrl: a deep Q-learning sketch-drawing agent.

An agent learns to redraw reference sketches on an 84x84 canvas by moving a
pen through 11x11 patch actions, rewarded first by pixel similarity and then
by a category classifier's confidence, with a gridmap layer that turns
episodes into cartesian end-effector trajectories for a drawing robot.
"""

from .actions import ActionDecoded, NUM_ACTIONS, decode_action, encode_action
from .canvas import blank_canvas, bresenham_points, rasterize_segment
from .classifier import SketchClassifier, train_classifier
from .config import RewardConfig, TrainerConfig, load_config, save_config
from .env import DrawingEnv, EpisodeTrace, StateSnapshot, build_streams, trace_episode
from .errors import (
    CheckpointError,
    ConfigurationError,
    ContractViolation,
    SketchFormatError,
    SketchParseError,
    SketchRLError,
    TrainingFault,
    TrajectoryFidelityError,
)
from .evaluate import EpisodeReport, eval_similarity_percent, report, run_draw
from .gridmap import GridmapConfig, Waypoint, export_trajectory, simulate_execution, to_cartesian
from .oracle import OracleEpisode, emit_supervised_batch, generate_episode
from .policy import epsilon_greedy, greedy_action, td_target
from .quickdraw import (
    Dataset,
    SketchRecord,
    TEST_ONLY_CATEGORIES,
    TRAIN_CATEGORIES,
    complexity_metrics,
    load_ndjson,
    parse_ndjson_line,
    rasterize_sketch,
)
from .replay import ReplayBuffer, Transition
from .rewards import pixel_difference, similarity_s, step_reward
from .trainer import ReferenceItem, pretrain, references_from_dataset, train

__version__ = "0.1.0"
