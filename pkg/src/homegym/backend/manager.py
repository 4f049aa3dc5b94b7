"""Rollout manager: registry, resource scheduler, task dispatcher.

All registry and scheduling state is owned by one decision thread; socket
reader threads and the public API only enqueue events.  That makes every
mutation serialized without fine-grained locks, at the price of routing
even registrations through the queue.

Dispatch modes:

* ``warm``: prefer an idle WARM slot already holding the rollout's scene;
  if a matching slot exists but is busy, wait for it rather than evicting
  a warm scene elsewhere; with no matching slot anywhere, take any idle
  slot and pay a synchronous load (the load lands in that rollout's
  latency).
* ``naive``: strict round-robin over workers, one in-flight rollout per
  worker, per-worker slot rotation, warmth ignored entirely (the scene
  document rides along; the worker reloads iff the slot holds something
  else).

Lost workers (3 missed heartbeats or a dropped connection) get their
in-flight rollouts requeued once; a second loss reports them Failed.
"""

from __future__ import annotations

import queue
import socket
import threading
import time
from dataclasses import dataclass, field

from homegym.backend.protocol import ConnectionClosed, ProtocolError, recv_msg, send_msg
from homegym.backend.slots import BUSY, COLD, LOADING, WARM

HEARTBEAT_MISS_LIMIT = 3
DEFAULT_ROLLOUT_TIMEOUT_S = 60.0
TICK_S = 0.2


class DuplicateRegistration(Exception):
    pass


@dataclass
class SlotView:
    worker_id: str
    slot_id: int
    phase: str = COLD
    scene_id: str | None = None
    last_used: float = 0.0
    rollout_id: str | None = None


@dataclass
class ScheduleDecision:
    assignments: list[tuple[str, int, str]]
    window: tuple[str, ...]


def schedule_preloads(
    slots: list[SlotView], upcoming: list[str], group_size: int
) -> ScheduleDecision:
    """Greedy pre-warming plan; pure function over a registry snapshot.

    Upcoming scenes are visited in order; each wants ``group_size`` slots
    already holding it (LOADING counts).  COLD slots are taken first,
    then idle WARM slots whose scene does not appear in the window,
    oldest-use first.  Ties spread across workers least-loaded-first.
    """
    window = tuple(upcoming)
    if not window:
        return ScheduleDecision([], window)
    want = set(window)
    phase = {(s.worker_id, s.slot_id): s.phase for s in slots}
    scene = {(s.worker_id, s.slot_id): s.scene_id for s in slots}
    last_used = {(s.worker_id, s.slot_id): s.last_used for s in slots}
    load: dict[str, int] = {}
    for s in slots:
        load.setdefault(s.worker_id, 0)
        if s.phase in (LOADING, BUSY):
            load[s.worker_id] += 1

    assignments: list[tuple[str, int, str]] = []
    seen: set[str] = set()
    for target in window:
        if target in seen:
            continue
        seen.add(target)
        have = sum(
            1
            for key, ph in phase.items()
            if ph in (WARM, LOADING) and scene[key] == target
        )
        need = group_size - have
        while need > 0:
            # Re-rank after every assignment so the spread tracks the load
            # this very decision is creating.
            cold = [s for s in slots if phase[(s.worker_id, s.slot_id)] == COLD]
            evictable = [
                s
                for s in slots
                if phase[(s.worker_id, s.slot_id)] == WARM
                and scene[(s.worker_id, s.slot_id)] not in want
            ]
            if cold:
                pick = min(
                    cold, key=lambda s: (load[s.worker_id], s.worker_id, s.slot_id)
                )
            elif evictable:
                pick = min(
                    evictable,
                    key=lambda s: (
                        load[s.worker_id],
                        last_used[(s.worker_id, s.slot_id)],
                        s.worker_id,
                        s.slot_id,
                    ),
                )
            else:
                break
            key = (pick.worker_id, pick.slot_id)
            assignments.append((pick.worker_id, pick.slot_id, target))
            phase[key] = LOADING
            scene[key] = target
            load[pick.worker_id] += 1
            need -= 1
    return ScheduleDecision(assignments, window)


@dataclass
class _WorkerRecord:
    worker_id: str
    epoch: int
    resources: dict
    conn: socket.socket
    send_lock: threading.Lock
    slots: list[SlotView]
    last_heartbeat: float
    inflight: int = 0
    rr_slot: int = 0
    alive: bool = True


@dataclass
class _Rollout:
    item: dict
    batch: "BatchHandle"
    status: str = "queued"  # queued | inflight | done | failed
    requeues: int = 0
    submitted_at: float = 0.0
    dispatched_at: float = 0.0
    assigned: tuple[str, int] | None = None
    result: dict | None = None


class BatchHandle:
    def __init__(self, items: list[dict], mode: str, group_size: int,
                 fresh: bool = False):
        self.mode = mode
        self.group_size = group_size
        self.fresh = fresh
        self.order = [it["rollout_id"] for it in items]
        self.pending = set(self.order)
        self.results: dict[str, dict] = {}
        self._done = threading.Event()

    def _finish(self, rollout_id: str, result: dict) -> None:
        if rollout_id in self.pending:
            self.pending.discard(rollout_id)
            self.results[rollout_id] = result
            if not self.pending:
                self._done.set()

    def wait(self, timeout: float | None = None) -> list[dict]:
        if not self._done.wait(timeout):
            raise TimeoutError(f"batch incomplete: {len(self.pending)} outstanding")
        return [self.results[rid] for rid in self.order]


class Manager:
    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        heartbeat_interval: float = 1.0,
        rollout_timeout: float = DEFAULT_ROLLOUT_TIMEOUT_S,
    ):
        self.heartbeat_interval = heartbeat_interval
        self.rollout_timeout = rollout_timeout
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self.address = self._listener.getsockname()
        self._events: queue.Queue = queue.Queue()
        self._workers: dict[str, _WorkerRecord] = {}
        self._scene_store: dict[str, str] = {}
        self._active: dict[str, _Rollout] = {}
        self._queued: list[str] = []  # rollout ids awaiting a slot, FIFO
        self._naive_ring: list[str] = []  # worker ids in registration order
        self._naive_ptr = 0
        self._mode = "warm"
        self._id_seq = 0
        self._worker_count = 0
        self._stopping = threading.Event()
        self._threads: list[threading.Thread] = []
        self.preload_log: list[tuple[str, int, str]] = []

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> tuple[str, int]:
        self._listener.listen(16)
        acc = threading.Thread(target=self._accept_loop, name="mgr-accept", daemon=True)
        dec = threading.Thread(target=self._decision_loop, name="mgr-decide", daemon=True)
        self._threads = [acc, dec]
        acc.start()
        dec.start()
        return self.address

    def stop(self) -> None:
        self._stopping.set()
        try:
            self._listener.close()
        except OSError:
            pass
        self._events.put(("stop",))
        for t in self._threads:
            t.join(timeout=5.0)
        for rec in list(self._workers.values()):
            try:
                rec.conn.close()
            except OSError:
                pass

    # -- public api --------------------------------------------------------

    def register_scene(self, scene_id: str, scene_text: str) -> None:
        self._events.put(("scene", scene_id, scene_text))

    def worker_count(self) -> int:
        return self._worker_count

    def wait_workers(self, n: int, timeout: float = 10.0) -> None:
        deadline = time.monotonic() + timeout
        while self._worker_count < n:
            if time.monotonic() > deadline:
                raise TimeoutError(f"{self._worker_count}/{n} workers registered")
            time.sleep(0.02)

    def submit_batch(
        self,
        items: list[dict],
        mode: str = "warm",
        upcoming: list[str] | None = None,
        group_size: int | None = None,
        fresh: bool = False,
    ) -> BatchHandle:
        """Queue rollouts; returns a handle to wait on.

        Each item: rollout_id, scene_id, scene (doc text, optional if
        registered), task (text), binding, actions, exec_path.  ``fresh``
        forces a from-scratch scene load per rollout (slot statefulness is
        part of the pre-warming machinery; benches disable it to model a
        stack with no scheduler at all).
        """
        if not items:
            raise ValueError("empty batch")
        if mode not in ("warm", "naive"):
            raise ValueError(f"unknown dispatch mode {mode!r}")
        handle = BatchHandle(items, mode, group_size or len(items), fresh)
        self._events.put(("submit", handle, items, list(upcoming or [])))
        return handle

    def schedule(self, upcoming: list[str], group_size: int) -> None:
        """Ask the scheduler to pre-warm slots for an upcoming window."""
        self._events.put(("preload", list(upcoming), group_size))

    def registry_snapshot(self) -> list[SlotView]:
        out: queue.Queue = queue.Queue()
        self._events.put(("snapshot", out))
        return out.get(timeout=5.0)

    # -- accept / reader threads ------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, addr = self._listener.accept()
            except OSError:
                return
            threading.Thread(
                target=self._conn_handler, args=(conn,), daemon=True,
                name=f"mgr-conn-{addr[1]}",
            ).start()

    def _conn_handler(self, conn: socket.socket) -> None:
        try:
            msg = recv_msg(conn)
        except (ProtocolError, ConnectionClosed, OSError):
            conn.close()
            return
        if msg.get("type") != "REGISTER" or not isinstance(msg.get("slots"), int):
            try:
                send_msg(conn, {"type": "ERROR", "reason": "malformed REGISTER"})
            except OSError:
                pass
            conn.close()
            return
        reply: queue.Queue = queue.Queue()
        self._events.put(("register", conn, msg, reply))
        worker_id = reply.get()
        if worker_id is None:
            return  # decision thread already sent ERROR and closed
        while not self._stopping.is_set():
            try:
                frame = recv_msg(conn)
            except (ProtocolError, ConnectionClosed, OSError):
                self._events.put(("conn_lost", worker_id))
                return
            self._events.put(("frame", worker_id, frame))

    # -- decision thread ---------------------------------------------------

    def _decision_loop(self) -> None:
        while True:
            try:
                event = self._events.get(timeout=TICK_S)
            except queue.Empty:
                self._tick()
                continue
            kind = event[0]
            if kind == "stop":
                self._fail_all("manager stopped")
                return
            handler = getattr(self, f"_ev_{kind}")
            handler(*event[1:])
            self._pump()

    def _tick(self) -> None:
        now = time.monotonic()
        limit = HEARTBEAT_MISS_LIMIT * self.heartbeat_interval
        for rec in list(self._workers.values()):
            if rec.alive and now - rec.last_heartbeat > limit:
                self._lose_worker(rec.worker_id, "missed heartbeats")
        for rid, ro in list(self._active.items()):
            if ro.status == "inflight" and now - ro.dispatched_at > self.rollout_timeout:
                self._terminal(rid, ok=False, reason="timeout")
                if ro.assigned is not None:
                    rec = self._workers.get(ro.assigned[0])
                    if rec is not None:
                        rec.inflight = max(0, rec.inflight - 1)
                        slot = rec.slots[ro.assigned[1]]
                        slot.phase = COLD
                        slot.scene_id = None
                        slot.rollout_id = None
        self._pump()

    # -- event handlers ----------------------------------------------------

    def _ev_scene(self, scene_id: str, scene_text: str) -> None:
        self._scene_store[scene_id] = scene_text

    def _ev_register(self, conn: socket.socket, msg: dict, reply: queue.Queue) -> None:
        requested = msg.get("worker_id")
        epoch = int(msg.get("epoch", 0))
        if requested is None:
            self._id_seq += 1
            worker_id = f"w{self._id_seq}"
        else:
            worker_id = str(requested)
            old = self._workers.get(worker_id)
            if old is not None and old.alive and epoch <= old.epoch:
                try:
                    send_msg(conn, {"type": "ERROR",
                                    "reason": "DuplicateRegistration"})
                except OSError:
                    pass
                conn.close()
                reply.put(None)
                return
            if old is not None:
                self._lose_worker(worker_id, "superseded by re-registration")
        rec = _WorkerRecord(
            worker_id=worker_id,
            epoch=epoch,
            resources=dict(msg.get("resources") or {}),
            conn=conn,
            send_lock=threading.Lock(),
            slots=[SlotView(worker_id, i) for i in range(msg["slots"])],
            last_heartbeat=time.monotonic(),
        )
        self._workers[worker_id] = rec
        if worker_id not in self._naive_ring:
            self._naive_ring.append(worker_id)
        self._worker_count = sum(1 for r in self._workers.values() if r.alive)
        try:
            with rec.send_lock:
                send_msg(conn, {"type": "REGISTER_ACK", "worker_id": worker_id})
        except OSError:
            reply.put(None)
            self._lose_worker(worker_id, "send failed during ack")
            return
        reply.put(worker_id)

    def _ev_frame(self, worker_id: str, msg: dict) -> None:
        rec = self._workers.get(worker_id)
        if rec is None or not rec.alive:
            return
        rec.last_heartbeat = time.monotonic()
        kind = msg["type"]
        if kind == "HEARTBEAT":
            return
        if kind == "PRELOAD_DONE":
            slot = rec.slots[msg["slot_id"]]
            slot.phase = WARM
            slot.scene_id = msg["scene_id"]
            slot.last_used = time.monotonic()
            return
        if kind == "RESULT":
            self._on_result(rec, msg)
            return
        if kind == "REQUEUE":
            self._requeue(msg.get("rollout_id"), f"worker requeue: {msg.get('reason')}")
            return
        if kind == "ERROR":
            rid = msg.get("rollout_id")
            if msg.get("slot_id") is not None:
                slot = rec.slots[msg["slot_id"]]
                slot.phase = COLD
                slot.scene_id = None
                slot.rollout_id = None
            if rid is not None:
                ro = self._active.get(rid)
                if ro is not None and ro.status == "inflight":
                    rec.inflight = max(0, rec.inflight - 1)
                    self._terminal(rid, ok=False, reason=msg.get("reason", "worker error"))

    def _ev_conn_lost(self, worker_id: str) -> None:
        self._lose_worker(worker_id, "connection lost")

    def _ev_submit(self, handle: BatchHandle, items: list[dict], upcoming: list[str]) -> None:
        self._mode = handle.mode
        now = time.monotonic()
        for it in items:
            rid = it["rollout_id"]
            if rid in self._active:
                self._finish_direct(handle, rid, ok=False,
                                    reason="duplicate rollout_id")
                continue
            if "scene" in it and it["scene"] is not None:
                self._scene_store.setdefault(it["scene_id"], it["scene"])
            ro = _Rollout(item=it, batch=handle, submitted_at=now)
            self._active[rid] = ro
            self._queued.append(rid)
        if upcoming:
            self._run_scheduler(upcoming, handle.group_size)

    def _ev_preload(self, upcoming: list[str], group_size: int) -> None:
        self._run_scheduler(upcoming, group_size)

    def _ev_snapshot(self, out: queue.Queue) -> None:
        views = [
            SlotView(s.worker_id, s.slot_id, s.phase, s.scene_id, s.last_used,
                     s.rollout_id)
            for rec in self._workers.values() if rec.alive
            for s in rec.slots
        ]
        out.put(views)

    # -- scheduling / dispatch --------------------------------------------

    def _run_scheduler(self, upcoming: list[str], group_size: int) -> None:
        known = [s for s in upcoming if s in self._scene_store]
        views = [
            s
            for rec in self._workers.values() if rec.alive
            for s in rec.slots
        ]
        decision = schedule_preloads(views, known, group_size)
        for worker_id, slot_id, scene_id in decision.assignments:
            rec = self._workers[worker_id]
            slot = rec.slots[slot_id]
            slot.phase = LOADING
            slot.scene_id = scene_id
            ok = self._send(rec, {
                "type": "PRELOAD", "slot_id": slot_id, "scene_id": scene_id,
                "scene": self._scene_store[scene_id],
            })
            if ok:
                self.preload_log.append((worker_id, slot_id, scene_id))

    def _pump(self) -> None:
        if not self._queued:
            return
        if self._mode == "naive":
            self._pump_naive()
        else:
            self._pump_warm()

    def _place_warm(self, scene_id: str):
        """('match'|'busy'|'any'|'none', rec, slot) for one rollout's scene."""
        idle_match = None
        busy_match = False
        idle_any = None
        for rec in self._workers.values():
            if not rec.alive:
                continue
            for slot in rec.slots:
                if slot.scene_id == scene_id and slot.phase in (WARM, BUSY, LOADING):
                    if slot.phase == WARM and idle_match is None:
                        idle_match = (rec, slot)
                    elif slot.phase != WARM:
                        busy_match = True
                if slot.phase == COLD and (idle_any is None or idle_any[1].phase == WARM):
                    # prefer COLD for the sync-load fallback: evicting a warm
                    # scene costs a future reload
                    idle_any = (rec, slot)
                elif slot.phase == WARM and idle_any is None:
                    idle_any = (rec, slot)
        if idle_match is not None:
            return ("match", *idle_match)
        if busy_match:
            return ("busy", None, None)
        if idle_any is not None:
            return ("any", *idle_any)
        return ("none", None, None)

    def _pump_warm(self) -> None:
        progressed = True
        while progressed:
            progressed = False
            for rid in list(self._queued):
                ro = self._active.get(rid)
                if ro is None or ro.status != "queued":
                    self._queued.remove(rid)
                    continue
                kind, rec, slot = self._place_warm(ro.item["scene_id"])
                if kind == "match":
                    self._dispatch(rec, slot, ro, include_scene=False)
                    progressed = True
                elif kind == "any":
                    self._dispatch(rec, slot, ro, include_scene=True)
                    progressed = True
                elif kind == "busy":
                    continue  # its scene is coming up on a busy slot; hold
                else:
                    return  # no capacity at all

    def _pump_naive(self) -> None:
        # Strict round-robin: the pointer names the next worker; if that
        # worker is mid-rollout we wait for it rather than skipping ahead.
        while self._queued:
            ring = [w for w in self._naive_ring
                    if w in self._workers and self._workers[w].alive]
            if not ring:
                return
            rec = self._workers[ring[self._naive_ptr % len(ring)]]
            if rec.inflight > 0:
                return
            rid = self._queued[0]
            ro = self._active.get(rid)
            if ro is None or ro.status != "queued":
                self._queued.pop(0)
                continue
            self._naive_ptr = (self._naive_ptr + 1) % len(ring)
            slot = rec.slots[rec.rr_slot % len(rec.slots)]
            rec.rr_slot += 1
            self._dispatch(rec, slot, ro, include_scene=True)

    def _dispatch(self, rec: _WorkerRecord, slot: SlotView, ro: _Rollout,
                  include_scene: bool) -> None:
        rid = ro.item["rollout_id"]
        self._queued.remove(rid)
        msg = {
            "type": "EXECUTE",
            "slot_id": slot.slot_id,
            "rollout_id": rid,
            "scene_id": ro.item["scene_id"],
            "task": ro.item["task"],
            "binding": ro.item["binding"],
            "actions": ro.item["actions"],
            "exec_path": ro.item.get("exec_path", "fast"),
        }
        if include_scene:
            msg["scene"] = self._scene_store.get(ro.item["scene_id"])
        if ro.batch.fresh:
            msg["fresh"] = True
        ro.status = "inflight"
        ro.dispatched_at = time.monotonic()
        ro.assigned = (rec.worker_id, slot.slot_id)
        slot.phase = BUSY
        slot.rollout_id = rid
        slot.last_used = ro.dispatched_at
        rec.inflight += 1
        if not self._send(rec, msg):
            return  # _lose_worker already requeued it

    def _on_result(self, rec: _WorkerRecord, msg: dict) -> None:
        rid = msg["rollout_id"]
        slot = rec.slots[msg["slot_id"]]
        slot.phase = WARM
        slot.scene_id = msg["scene_id"]
        slot.rollout_id = None
        slot.last_used = time.monotonic()
        ro = self._active.get(rid)
        if ro is None or ro.status != "inflight":
            return  # late result after timeout/requeue; keep the slot update
        rec.inflight = max(0, rec.inflight - 1)
        self._terminal(rid, ok=True, report=msg.get("report"),
                       timings=msg.get("timings"), worker_id=rec.worker_id)

    # -- bookkeeping -------------------------------------------------------

    def _send(self, rec: _WorkerRecord, msg: dict) -> bool:
        try:
            with rec.send_lock:
                send_msg(rec.conn, msg)
            return True
        except OSError:
            self._lose_worker(rec.worker_id, "send failed")
            return False

    def _lose_worker(self, worker_id: str, reason: str) -> None:
        rec = self._workers.get(worker_id)
        if rec is None or not rec.alive:
            return
        rec.alive = False
        try:
            rec.conn.close()
        except OSError:
            pass
        self._worker_count = sum(1 for r in self._workers.values() if r.alive)
        for slot in rec.slots:
            if slot.rollout_id is not None:
                self._requeue(slot.rollout_id, f"worker {worker_id} lost ({reason})")
                slot.rollout_id = None
            slot.phase = COLD
            slot.scene_id = None

    def _requeue(self, rollout_id: str | None, reason: str) -> None:
        if rollout_id is None:
            return
        ro = self._active.get(rollout_id)
        if ro is None or ro.status != "inflight":
            return
        if ro.assigned is not None:
            rec = self._workers.get(ro.assigned[0])
            if rec is not None and rec.alive:
                rec.inflight = max(0, rec.inflight - 1)
                slot = rec.slots[ro.assigned[1]]
                if slot.rollout_id == rollout_id:
                    slot.rollout_id = None
                    slot.phase = COLD
                    slot.scene_id = None
        ro.requeues += 1
        ro.assigned = None
        if ro.requeues > 1:
            self._terminal(rollout_id, ok=False, reason=f"requeue limit: {reason}")
            return
        ro.status = "queued"
        self._queued.append(rollout_id)

    def _terminal(self, rollout_id: str, ok: bool, reason: str | None = None,
                  report: dict | None = None, timings: dict | None = None,
                  worker_id: str | None = None) -> None:
        ro = self._active.pop(rollout_id, None)
        if ro is None:
            return
        ro.status = "done" if ok else "failed"
        latency_ms = (time.monotonic() - ro.submitted_at) * 1000.0
        ro.batch._finish(rollout_id, {
            "rollout_id": rollout_id,
            "ok": ok,
            "reason": reason,
            "report": report,
            "timings": timings or {},
            "latency_ms": latency_ms,
            "worker_id": worker_id,
            "requeues": ro.requeues,
        })

    def _finish_direct(self, handle: BatchHandle, rollout_id: str, ok: bool,
                       reason: str) -> None:
        handle._finish(rollout_id, {
            "rollout_id": rollout_id, "ok": ok, "reason": reason,
            "report": None, "timings": {}, "latency_ms": 0.0,
            "worker_id": None, "requeues": 0,
        })

    def _fail_all(self, reason: str) -> None:
        for rid in list(self._active):
            self._terminal(rid, ok=False, reason=reason)
