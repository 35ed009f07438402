"""Fixed network topologies.

Two networks share the same conv trunk: the Q-network adds a second stream
for the local pen patch and ends in 242 action values; the category
classifier runs the trunk on a single canvas and ends in one logit per
trained category.
"""

from dataclasses import dataclass, field

from ..actions import NUM_ACTIONS
from ..canvas import DEFAULT_SIZE
from ..errors import ConfigurationError
from .ops import conv_output_size

ACTIVATIONS = ("relu", "linear")


@dataclass(frozen=True)
class ConvSpec:
    name: str
    in_channels: int
    out_channels: int
    kernel: int
    stride: int
    activation: str = "relu"

    def param_count(self):
        return self.out_channels * self.in_channels * self.kernel * self.kernel + self.out_channels


@dataclass(frozen=True)
class FCSpec:
    name: str
    in_features: int
    out_features: int
    activation: str = "linear"

    def param_count(self):
        return self.in_features * self.out_features + self.out_features


@dataclass(frozen=True)
class StreamSpec:
    name: str
    input_shape: tuple  # (C, H, W)
    convs: tuple

    def output_features(self):
        c, h, w = self.input_shape
        for conv in self.convs:
            h = conv_output_size(h, conv.kernel, conv.stride)
            w = conv_output_size(w, conv.kernel, conv.stride)
            c = conv.out_channels
        return c * h * w


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    streams: tuple
    fcs: tuple
    expected_params: int = field(default=0)

    def layers(self):
        for stream in self.streams:
            yield from stream.convs
        yield from self.fcs

    def layer_names(self):
        return [layer.name for layer in self.layers()]


def param_count(spec):
    return sum(layer.param_count() for layer in spec.layers())


Q_NET_PARAM_COUNT = 1_889_426


def q_network_spec(fc1_activation="linear", m=DEFAULT_SIZE, num_actions=NUM_ACTIONS):
    """Two-stream action-value network.

    Global stream: 4x84x84 -> conv(32,k8,s4) -> conv(64,k4,s2) -> conv(64,k3,s1),
    flattening to 3136. Local stream: 1x11x11 -> conv(128,k11,s1) -> 128.
    Concatenated 3264 -> fc(512, fc1_activation) -> fc(num_actions, linear).
    """
    if fc1_activation not in ACTIVATIONS:
        raise ConfigurationError(f"fc1_activation must be one of {ACTIVATIONS}, got {fc1_activation!r}")
    global_stream = StreamSpec(
        name="global",
        input_shape=(4, m, m),
        convs=(
            ConvSpec("conv1", 4, 32, kernel=8, stride=4),
            ConvSpec("conv2", 32, 64, kernel=4, stride=2),
            ConvSpec("conv3", 64, 64, kernel=3, stride=1),
        ),
    )
    local_stream = StreamSpec(
        name="local",
        input_shape=(1, 11, 11),
        convs=(ConvSpec("conv_local", 1, 128, kernel=11, stride=1),),
    )
    concat = global_stream.output_features() + local_stream.output_features()
    spec = NetworkSpec(
        name="qnet",
        streams=(global_stream, local_stream),
        fcs=(
            FCSpec("fc1", concat, 512, activation=fc1_activation),
            FCSpec("fc2", 512, num_actions, activation="linear"),
        ),
    )
    expected = Q_NET_PARAM_COUNT if (m == DEFAULT_SIZE and num_actions == NUM_ACTIONS) else param_count(spec)
    return NetworkSpec(spec.name, spec.streams, spec.fcs, expected_params=expected)


def classifier_spec(num_classes=8, m=DEFAULT_SIZE):
    """Single-stream category classifier over one canvas channel."""
    stream = StreamSpec(
        name="canvas",
        input_shape=(1, m, m),
        convs=(
            ConvSpec("conv1", 1, 32, kernel=8, stride=4),
            ConvSpec("conv2", 32, 64, kernel=4, stride=2),
            ConvSpec("conv3", 64, 64, kernel=3, stride=1),
        ),
    )
    spec = NetworkSpec(
        name="classifier",
        streams=(stream,),
        fcs=(
            FCSpec("fc1", stream.output_features(), 512, activation="relu"),
            FCSpec("fc2", 512, num_classes, activation="linear"),
        ),
    )
    return NetworkSpec(spec.name, spec.streams, spec.fcs, expected_params=param_count(spec))
