from .protocol import PROTO_VERSION, ProtocolError
from .record import RecordError, SessionRecorder, read_record, replay
from .server import TeleopServer
from .session import resolve_command
