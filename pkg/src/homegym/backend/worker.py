"""Self-registering rollout worker.

One TCP connection to the manager, one command queue + thread per slot,
one heartbeat thread.  Slots share nothing; the socket is the only shared
resource (guarded by a send lock).

``crash()`` exists for fault-injection tests: it drops the connection and
stops processing without any goodbye, exactly like a killed process.
"""

from __future__ import annotations

import queue
import socket
import threading
import time

from homegym.backend.protocol import ConnectionClosed, ProtocolError, recv_msg, send_msg
from homegym.backend.slots import WARM, SimSlot, SlotNotWarm

HEARTBEAT_INTERVAL = 1.0


class Worker:
    def __init__(
        self,
        manager_addr: tuple[str, int],
        slots: int = 2,
        worker_id: str | None = None,
        epoch: int = 0,
        load_cost_ms: float = 0.0,
        charge_work: bool = True,
        heartbeat_interval: float = HEARTBEAT_INTERVAL,
        cpu_slots: int | None = None,
        mem_mb: int = 1024,
        accel_score: int = 0,
    ):
        if slots < 1:
            raise ValueError("a worker needs at least one slot")
        self.manager_addr = manager_addr
        self.requested_id = worker_id
        self.worker_id: str | None = None
        self.epoch = epoch
        self.heartbeat_interval = heartbeat_interval
        self.resources = {
            "cpu_slots": cpu_slots if cpu_slots is not None else slots,
            "mem_mb": mem_mb,
            "accel_score": accel_score,
        }
        self.slots = [SimSlot(i, load_cost_ms, charge_work) for i in range(slots)]
        self._queues = [queue.Queue() for _ in range(slots)]
        self._sock: socket.socket | None = None
        self._send_lock = threading.Lock()
        self._dead = threading.Event()
        self._threads: list[threading.Thread] = []

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> str:
        self._sock = socket.create_connection(self.manager_addr, timeout=10.0)
        self._sock.settimeout(None)
        send_msg(
            self._sock,
            {
                "type": "REGISTER",
                "worker_id": self.requested_id,
                "epoch": self.epoch,
                "resources": self.resources,
                "slots": len(self.slots),
            },
        )
        ack = recv_msg(self._sock)
        if ack["type"] == "ERROR":
            self._sock.close()
            raise RuntimeError(f"registration rejected: {ack.get('reason')}")
        if ack["type"] != "REGISTER_ACK":
            self._sock.close()
            raise ProtocolError(f"expected REGISTER_ACK, got {ack['type']}")
        self.worker_id = ack["worker_id"]
        self._threads = [
            threading.Thread(target=self._reader, name=f"{self.worker_id}-rx", daemon=True),
            threading.Thread(target=self._heartbeat, name=f"{self.worker_id}-hb", daemon=True),
        ]
        for i in range(len(self.slots)):
            self._threads.append(
                threading.Thread(
                    target=self._slot_loop, args=(i,), name=f"{self.worker_id}-s{i}", daemon=True
                )
            )
        for t in self._threads:
            t.start()
        return self.worker_id

    def stop(self) -> None:
        self._dead.set()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        for q in self._queues:
            q.put(None)

    def crash(self) -> None:
        """Abrupt death: no goodbye, no draining. Fault-injection hook."""
        self.stop()

    def join(self, timeout: float | None = None) -> None:
        for t in self._threads:
            t.join(timeout)

    # -- plumbing ----------------------------------------------------------

    def _send(self, msg: dict) -> None:
        if self._dead.is_set():
            return
        try:
            with self._send_lock:
                send_msg(self._sock, msg)
        except OSError:
            self._dead.set()

    def _reader(self) -> None:
        while not self._dead.is_set():
            try:
                msg = recv_msg(self._sock)
            except (ProtocolError, ConnectionClosed, OSError):
                self._dead.set()
                for q in self._queues:
                    q.put(None)
                return
            kind = msg["type"]
            if kind in ("PRELOAD", "EXECUTE"):
                slot_id = msg.get("slot_id", 0)
                if not (0 <= slot_id < len(self.slots)):
                    self._send(
                        {"type": "ERROR", "worker_id": self.worker_id,
                         "reason": f"no slot {slot_id}"}
                    )
                    continue
                self._queues[slot_id].put((time.perf_counter(), msg))
            # HEARTBEAT or anything else from the manager is ignored.

    def _heartbeat(self) -> None:
        while not self._dead.wait(self.heartbeat_interval):
            self._send({"type": "HEARTBEAT", "worker_id": self.worker_id,
                        "ts": time.time()})

    def _slot_loop(self, slot_id: int) -> None:
        slot = self.slots[slot_id]
        q = self._queues[slot_id]
        while not self._dead.is_set():
            item = q.get()
            if item is None:
                return
            enqueued, msg = item
            queue_ms = (time.perf_counter() - enqueued) * 1000.0
            try:
                if msg["type"] == "PRELOAD":
                    load_ms = slot.load(msg["scene_id"], msg["scene"])
                    self._send(
                        {"type": "PRELOAD_DONE", "worker_id": self.worker_id,
                         "slot_id": slot_id, "scene_id": msg["scene_id"],
                         "load_ms": load_ms}
                    )
                else:
                    self._run_rollout(slot, slot_id, queue_ms, msg)
            except Exception as exc:  # bad payloads must not kill the slot
                slot.unload()
                self._send(
                    {"type": "ERROR", "worker_id": self.worker_id,
                     "slot_id": slot_id, "rollout_id": msg.get("rollout_id"),
                     "reason": f"{type(exc).__name__}: {exc}"}
                )

    def _run_rollout(self, slot: SimSlot, slot_id: int, queue_ms: float, msg: dict) -> None:
        rollout_id = msg["rollout_id"]
        scene_id = msg["scene_id"]
        load_ms = 0.0
        if msg.get("fresh"):
            slot.unload()
        if slot.phase != WARM or slot.scene_id != scene_id:
            scene_text = msg.get("scene")
            if scene_text is None:
                # Dispatcher thought this slot was warm; hand the rollout back.
                self._send(
                    {"type": "REQUEUE", "worker_id": self.worker_id,
                     "rollout_id": rollout_id, "reason": "slot_not_warm"}
                )
                return
            load_ms = slot.load(scene_id, scene_text)
        try:
            report, exec_ms = slot.execute(
                scene_id, msg["task"], msg["binding"], msg["actions"], msg["exec_path"]
            )
        except SlotNotWarm as exc:
            self._send(
                {"type": "REQUEUE", "worker_id": self.worker_id,
                 "rollout_id": rollout_id, "reason": str(exc)}
            )
            return
        self._send(
            {"type": "RESULT", "worker_id": self.worker_id, "slot_id": slot_id,
             "rollout_id": rollout_id, "scene_id": scene_id,
             "report": report.to_dict(),
             "timings": {"queue_ms": queue_ms, "load_ms": load_ms,
                         "exec_ms": exec_ms}}
        )
