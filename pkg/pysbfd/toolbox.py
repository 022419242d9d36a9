# Exposed as API
from .channel import *  # noqa
from .exceptions import *  # noqa
from .grid import *  # noqa
from .harness import *  # noqa
from .scenario import *  # noqa
from .sensing import *  # noqa
from .uplink import *  # noqa
from .utils import RandomStreams, Stream  # noqa
from .waveform import *  # noqa
