from homegym.backend.bench import (
    CONFIG_NAMES,
    BenchConfig,
    ConfigStats,
    build_workload,
    run_bench,
    stats_to_csv,
)
from homegym.backend.local import LocalBackend
from homegym.backend.manager import (
    BatchHandle,
    DuplicateRegistration,
    Manager,
    ScheduleDecision,
    SlotView,
    schedule_preloads,
)
from homegym.backend.protocol import (
    MESSAGE_TYPES,
    ConnectionClosed,
    ProtocolError,
    recv_msg,
    send_msg,
)
from homegym.backend.slots import BUSY, COLD, LOADING, WARM, SimSlot, SlotNotWarm
from homegym.backend.worker import Worker

__all__ = [
    "BenchConfig",
    "ConfigStats",
    "CONFIG_NAMES",
    "build_workload",
    "run_bench",
    "stats_to_csv",
    "LocalBackend",
    "Manager",
    "BatchHandle",
    "DuplicateRegistration",
    "ScheduleDecision",
    "SlotView",
    "schedule_preloads",
    "MESSAGE_TYPES",
    "ProtocolError",
    "ConnectionClosed",
    "send_msg",
    "recv_msg",
    "SimSlot",
    "SlotNotWarm",
    "COLD",
    "LOADING",
    "WARM",
    "BUSY",
    "Worker",
]
