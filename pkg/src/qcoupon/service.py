"""HTTP/JSON service exposing blind-box game sessions.

Sessions live in memory; an optional append-only JSONL journal records
every create/play/guess so a run can be replayed and verified offline.
Requests for the same session are serialized by a per-session lock;
different sessions proceed concurrently under the threading server.

The hidden set never appears in a response while a session is open.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from . import blindbox
from .errors import SessionClosedError
from .model import ChannelParams

__all__ = ["GameService", "make_server", "replay_journal", "DEFAULT_PORT"]

DEFAULT_PORT = 8077

Json = dict


def _random_seed() -> int:
    return int.from_bytes(os.urandom(4), "big")


@dataclass
class _Slot:
    session: blindbox.GameSession
    lock: threading.Lock = field(default_factory=threading.Lock)


class GameService:
    """Session registry plus the request-level API, HTTP-agnostic."""

    def __init__(self, journal_path: Optional[Union[str, Path]] = None, seed_factory=None):
        self._slots: Dict[str, _Slot] = {}
        self._registry_lock = threading.Lock()
        self._journal_lock = threading.Lock()
        self._counter = 0
        self._journal_path = Path(journal_path) if journal_path else None
        self._seed_factory = seed_factory or _random_seed

    def _journal(self, record: Json) -> None:
        if self._journal_path is None:
            return
        with self._journal_lock:
            with open(self._journal_path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")

    @staticmethod
    def _envelope(session_id: str, session: blindbox.GameSession) -> Json:
        cfg = session.config
        body: Json = {
            "session_id": session_id,
            "seed": session.seed,
            "n": cfg.n,
            "m": cfg.m,
            "eta": cfg.params.eta,
            "dark": cfg.params.dark_rate,
            "vis": cfg.params.visibility,
            "state": session.state,
            "spent": session.spent,
            "classical_resources": cfg.reward,
            "plays": [
                {"intensity": p.intensity, "clicked_bins": list(p.clicked_bins)}
                for p in session.plays
            ],
        }
        if session.state != blindbox.STATE_OPEN:
            body["payoff"] = session.payoff
            body["net"] = session.net
            body["revealed_missing"] = sorted(session.hidden_missing)
        return body

    def create(self, body: Json) -> Tuple[int, Json]:
        try:
            params = ChannelParams(
                eta=float(body.get("eta", 1.0)),
                dark_rate=float(body.get("dark", 0.0)),
                visibility=float(body.get("vis", 1.0)),
            )
            config = blindbox.GameConfig(
                n=int(body["n"]), m=int(body["m"]), params=params
            )
            seed = int(body["seed"]) if "seed" in body and body["seed"] is not None else self._seed_factory()
            if seed < 0:
                raise ValueError("seed must be >= 0")
        except (KeyError, TypeError, ValueError) as exc:
            return 422, {"error": f"invalid game config: {exc}"}
        session = blindbox.new_session(seed, config)
        with self._registry_lock:
            self._counter += 1
            session_id = f"g{self._counter:06d}"
            self._slots[session_id] = _Slot(session=session)
        self._journal(
            {
                "event": "create",
                "session_id": session_id,
                "seed": seed,
                "n": config.n,
                "m": config.m,
                "eta": params.eta,
                "dark": params.dark_rate,
                "vis": params.visibility,
            }
        )
        return 201, self._envelope(session_id, session)

    def _slot(self, session_id: str) -> Optional[_Slot]:
        with self._registry_lock:
            return self._slots.get(session_id)

    def get(self, session_id: str) -> Tuple[int, Json]:
        slot = self._slot(session_id)
        if slot is None:
            return 404, {"error": f"unknown session {session_id!r}"}
        with slot.lock:
            return 200, self._envelope(session_id, slot.session)

    def play(self, session_id: str, body: Json) -> Tuple[int, Json]:
        slot = self._slot(session_id)
        if slot is None:
            return 404, {"error": f"unknown session {session_id!r}"}
        try:
            intensity = float(body["intensity"])
        except (KeyError, TypeError, ValueError) as exc:
            return 422, {"error": f"invalid intensity: {exc}"}
        with slot.lock:
            try:
                outcome = blindbox.play(slot.session, intensity)
            except SessionClosedError as exc:
                return 409, {"error": str(exc)}
            except ValueError as exc:
                return 422, {"error": str(exc)}
            clicked = sorted(outcome.clicked_bins)
            spent = slot.session.spent
        self._journal(
            {
                "event": "play",
                "session_id": session_id,
                "intensity": intensity,
                "clicked_bins": clicked,
                "spent": spent,
            }
        )
        return 200, {
            "session_id": session_id,
            "clicked_bins": clicked,
            "spent": spent,
            "plays": len(slot.session.plays),
        }

    def guess(self, session_id: str, body: Json) -> Tuple[int, Json]:
        slot = self._slot(session_id)
        if slot is None:
            return 404, {"error": f"unknown session {session_id!r}"}
        missing = body.get("missing")
        if not isinstance(missing, list):
            return 422, {"error": "body must carry a list field 'missing'"}
        with slot.lock:
            try:
                payoff = blindbox.guess(slot.session, [int(i) for i in missing])
            except SessionClosedError as exc:
                return 409, {"error": str(exc)}
            except (TypeError, ValueError) as exc:
                return 422, {"error": str(exc)}
            session = slot.session
            result = {
                "session_id": session_id,
                "state": session.state,
                "payoff": payoff,
                "net": session.net,
                "revealed_missing": sorted(session.hidden_missing),
            }
        self._journal(
            {
                "event": "guess",
                "session_id": session_id,
                "missing": sorted(int(i) for i in missing),
                "state": result["state"],
                "payoff": payoff,
            }
        )
        return 200, result


def _make_handler(service: GameService, cors_origin: Optional[str]):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload, content_type="application/json") -> None:
            data = (
                payload.encode("utf-8")
                if isinstance(payload, str)
                else json.dumps(payload, sort_keys=True).encode("utf-8")
            )
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            if cors_origin:
                self.send_header("Access-Control-Allow-Origin", cors_origin)
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(data)

        def _body(self) -> Optional[Json]:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                parsed = json.loads(raw or b"{}")
            except json.JSONDecodeError:
                return None
            return parsed if isinstance(parsed, dict) else None

        def do_OPTIONS(self):
            self._send(204, "")

        def do_GET(self):
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            if parts == ["healthz"]:
                self._send(200, "ok", content_type="text/plain; charset=utf-8")
            elif len(parts) == 2 and parts[0] == "games":
                self._send(*service.get(parts[1]))
            else:
                self._send(404, {"error": f"no route for GET {self.path}"})

        def do_POST(self):
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            body = self._body()
            if body is None:
                self._send(400, {"error": "request body must be a JSON object"})
                return
            if parts == ["games"]:
                self._send(*service.create(body))
            elif len(parts) == 3 and parts[0] == "games" and parts[2] == "plays":
                self._send(*service.play(parts[1], body))
            elif len(parts) == 3 and parts[0] == "games" and parts[2] == "guess":
                self._send(*service.guess(parts[1], body))
            else:
                self._send(404, {"error": f"no route for POST {self.path}"})

    return Handler


def make_server(
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
    journal_path: Optional[Union[str, Path]] = None,
    cors_origin: Optional[str] = None,
    seed_factory=None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the threading HTTP server."""
    service = GameService(journal_path=journal_path, seed_factory=seed_factory)
    server = ThreadingHTTPServer((host, port), _make_handler(service, cors_origin))
    server.game_service = service  # type: ignore[attr-defined]
    return server


def replay_journal(path: Union[str, Path]) -> Dict[str, blindbox.GameSession]:
    """Re-simulate every journaled session and verify the recorded click
    patterns; raises ValueError on the first divergence."""
    sessions: Dict[str, blindbox.GameSession] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            sid = record["session_id"]
            event = record["event"]
            if event == "create":
                config = blindbox.GameConfig(
                    n=record["n"],
                    m=record["m"],
                    params=ChannelParams(
                        eta=record["eta"],
                        dark_rate=record["dark"],
                        visibility=record["vis"],
                    ),
                )
                sessions[sid] = blindbox.new_session(record["seed"], config)
            elif event == "play":
                outcome = blindbox.play(sessions[sid], record["intensity"])
                replayed = sorted(outcome.clicked_bins)
                if replayed != record["clicked_bins"]:
                    raise ValueError(
                        f"line {lineno}: replay diverged for {sid}: "
                        f"{replayed} != {record['clicked_bins']}"
                    )
            elif event == "guess":
                payoff = blindbox.guess(sessions[sid], record["missing"])
                if sessions[sid].state != record["state"] or payoff != record["payoff"]:
                    raise ValueError(f"line {lineno}: replay diverged for {sid} on guess")
            else:
                raise ValueError(f"line {lineno}: unknown journal event {event!r}")
    return sessions
