"""Desk-scale humanoid whole-body teleoperation simulator.

A surrogate plant (per-joint PD dynamics plus two-link leg kinematics), the
full reward suite, upper-body pose curriculum, left/right mirror machinery,
domain randomization, a framed binary command protocol with a
latency-simulating transport, and a session gateway that binds a cockpit
client to the plant. See README.md for the CLI and the browser cockpit.
"""

from .curriculum import (
    CurriculumState,
    PoseScheduler,
    PoseTarget,
    maybe_promote,
    sample_ratio,
    sample_spread,
    spread_cdf,
    spread_pdf,
)
from .errors import (
    BadCrc,
    BadLength,
    BadMagic,
    BadVersion,
    ConfigError,
    DegenerateRobot,
    Disconnected,
    EmptyEpisode,
    NotFoundError,
    NumericalError,
    ProtocolError,
    ShapeError,
    TeleopsimError,
    TruncationError,
    VersionError,
)
from .mirror import (
    MirrorSpec,
    Transition,
    augment_transition,
    mirror_action,
    mirror_command,
    mirror_frame,
    mirror_stack,
    mirror_state,
    symmetry_losses,
)
from .observation import (
    Command,
    FrameLayout,
    NetShape,
    ObservationStack,
    RobotState,
    assemble_frame,
    clamp_command,
    ground_truth_pair,
    net_shape,
    net_shape_for,
    push_frame,
)
from .plant import (
    ActionCommand,
    Plant,
    PlantConfig,
    initial_state,
    interpolate_upper,
    is_terminated,
    pd_torque,
    step_state,
)
from .randomize import (
    EpisodeRandomization,
    RandomizationConfig,
    episode_gains,
    noisy_observation,
    sample_episode,
)
from .rewards import (
    RewardBreakdown,
    RewardConfig,
    RewardEngine,
    load_reward,
    r_knee,
    stand_still_gate,
)
from .robot import (
    JointSpec,
    RobotDescription,
    load_preset,
    load_robot,
    mirror_index_permutation,
    validate,
)
from .transport import SimulatedLink, TransportConfig, VirtualClock, WallClock, channel_pair

__version__ = "0.1.0"
