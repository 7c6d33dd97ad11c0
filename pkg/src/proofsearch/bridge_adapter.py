"""Loopback bridge adapter: serves the toy prover over the line-delimited
wire protocol. Run as `python -m proofsearch.bridge_adapter SUITE_FILE`.

Used by the integration tests as the reference adapter, and as a template
for adapters that wrap real provers.
"""

from __future__ import annotations

import json
import sys

from .bridge import obligations_to_wire
from .core import ProofState
from .toy import ToyEnvironment, load_suite


def _respond(payload: dict):
    sys.stdout.write(json.dumps(payload, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def serve(suite_path: str, stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    suite = load_suite(suite_path)
    states: dict = {}  # state id -> ProofState
    env: ToyEnvironment | None = None
    counter = 0

    def issue(state: ProofState) -> str:
        nonlocal counter
        counter += 1
        state_id = f"s{counter}"
        states[state_id] = state
        return state_id

    def state_response(request_id, state: ProofState) -> dict:
        if state.is_error:
            return {"id": request_id, "status": "error", "message": state.error_message}
        payload = {"id": request_id, "status": "qed" if state.is_qed else "ok",
                   "state_id": issue(state)}
        if not state.is_qed:
            payload["obligations"] = obligations_to_wire(state)
        return payload

    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            request_id = request.get("id")
            cmd = request.get("cmd")
        except json.JSONDecodeError:
            _respond({"id": None, "status": "error", "message": "malformed request line"})
            continue
        if cmd == "shutdown":
            _respond({"id": request_id, "status": "ok"})
            return 0
        if cmd == "reset":
            states.clear()
            env = None
            _respond({"id": request_id, "status": "ok"})
        elif cmd == "init":
            theorem = request.get("theorem")
            if theorem not in suite.theorems:
                _respond({"id": request_id, "status": "error",
                          "message": f"unknown theorem {theorem!r}"})
                continue
            env = ToyEnvironment(suite.theorem(theorem))
            _respond(state_response(request_id, env.initial_state(theorem)))
        elif cmd == "apply":
            state_id = request.get("state_id")
            if env is None or state_id not in states:
                _respond({"id": request_id, "status": "error",
                          "message": f"unknown state id {state_id!r}"})
                continue
            tactic = request.get("tactic")
            if not isinstance(tactic, str) or not tactic.strip():
                _respond({"id": request_id, "status": "error",
                          "message": "missing or empty tactic"})
                continue
            _respond(state_response(request_id, env.apply_tactic(states[state_id], tactic)))
        else:
            _respond({"id": request_id, "status": "error",
                      "message": f"unknown command {cmd!r}"})
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m proofsearch.bridge_adapter SUITE_FILE", file=sys.stderr)
        return 2
    return serve(argv[0])


if __name__ == "__main__":
    raise SystemExit(main())
