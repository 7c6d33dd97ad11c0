"""Prompt serialization protocol: rendering search state into the
keyword-structured agent prompt, and parsing model responses back into
tactics.

The agent-prompt grammar and the response grammar are documented in
docs/prompt-grammar.md; `check_agent_grammar` is the reference checker for
the former. System prompts are fixed per environment style and shipped as
assets.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Sequence

from .core import GlobalContext, Obligation, ProofState, ordered_obligations
from .retrieval import RetrievalResult

NATURAL_STOP = "natural-stop"
LENGTH_CAP = "length-cap"

_ASSETS = {
    "lean": "system_lean.txt",
    "coq": "system_coq.txt",
}

_SECTION_GOALS = "goals"
_SECTION_INFORMAL = "informal"
_SECTION_STEPS = "steps"
_SECTION_RETRIEVED = "retrieved"
_SECTION_INCORRECT = "incorrect"
_SECTION_LAST = "last"
_SECTION_NOTICE = "notice"

# dropped first under budget pressure; goals and the format notice never drop
_DROP_ORDER = (_SECTION_STEPS, _SECTION_INFORMAL, _SECTION_RETRIEVED,
               _SECTION_INCORRECT, _SECTION_LAST)


class PromptBudgetError(Exception):
    """The token budget cannot even fit the current goals."""


@dataclass
class PromptBundle:
    """Everything promptify needs: the stack view (innermost state last),
    the failure set at the current state, retrieval results, global
    context, and last-step feedback."""

    stack: Sequence[ProofState]
    bad_tactics: Sequence[str] = ()
    retrieved: RetrievalResult | None = None
    context: GlobalContext | None = None
    steps: Sequence[str] = ()
    last_step: str | None = None
    last_outcome: str | None = None  # "success" or an error message
    format_error_notice: str | None = None

    @property
    def current(self) -> ProofState:
        return self.stack[-1]


@dataclass(frozen=True)
class AgentPrompt:
    system: str
    agent_text: str
    token_estimate: int


@dataclass(frozen=True)
class ParsedAction:
    tactic: str


@dataclass(frozen=True)
class FormatError:
    reason: str
    repair_message: str


def estimate_tokens(text: str, estimator: Callable[[str], int] | None = None) -> int:
    """Default token estimate: ceil(len / 4). A custom estimator wins."""
    if estimator is not None:
        return estimator(text)
    return math.ceil(len(text) / 4)


def system_prompt(style: str = "lean") -> str:
    try:
        asset = _ASSETS[style]
    except KeyError:
        raise ValueError(f"unknown system-prompt style {style!r}") from None
    return resources.files("proofsearch.assets").joinpath(asset).read_text(encoding="utf-8")


def sketch_prompt() -> str:
    return resources.files("proofsearch.assets").joinpath("sketch_fewshot.txt").read_text(
        encoding="utf-8"
    )


def _render_goals(state: ProofState, retrieved: RetrievalResult | None) -> str:
    lines = ["[GOALS]"]
    for i, obligation in enumerate(ordered_obligations(state), start=1):
        lines.append(f"[GOAL] {i}")
        lines.append(obligation.goal)
        hyps = obligation.hypothesis_map()
        if hyps:
            lines.append(f"[HYPOTHESES] {i}")
            for name, prop in hyps.items():
                lines.append(f"[HYPOTHESIS] {name} : {prop}")
        if i == 1 and retrieved is not None and len(retrieved):
            definitions = [r for r, _ in retrieved if r.kind == "definition"]
            theorems = [r for r, _ in retrieved if r.kind == "lemma"]
            if definitions:
                lines.append(f"[DEFINITIONS] {i}")
                lines.extend(f"[DEFINITION] {r.name} : {r.statement}" for r in definitions)
            if theorems:
                lines.append(f"[THEOREMS] {i}")
                lines.extend(f"[THEOREM] {r.name} : {r.statement}" for r in theorems)
    return "\n".join(lines)


def _sections(bundle: PromptBundle, with_retrieved: bool) -> dict:
    sections: dict = {}
    retrieved = bundle.retrieved if with_retrieved else None
    sections[_SECTION_GOALS] = _render_goals(bundle.current, retrieved)
    if bundle.context is not None and bundle.context.informal_hints:
        sections[_SECTION_INFORMAL] = "[INFORMAL-PROOF]\n" + bundle.context.informal_hints.strip()
    if bundle.steps:
        sections[_SECTION_STEPS] = "[STEPS]" + "".join(f"[STEP]{t}" for t in bundle.steps)
    if bundle.bad_tactics:
        sections[_SECTION_INCORRECT] = "[INCORRECT STEPS]" + "".join(
            f"[STEP]{t}" for t in bundle.bad_tactics
        )
    if bundle.last_step is not None:
        if bundle.last_outcome == "success":
            tail = "[SUCCESS]"
        else:
            tail = f"[ERROR MESSAGE]\n{bundle.last_outcome or ''}".rstrip()
        sections[_SECTION_LAST] = f"[LAST STEP] {bundle.last_step}\n{tail}"
    if bundle.format_error_notice:
        sections[_SECTION_NOTICE] = bundle.format_error_notice
    return sections


_SECTION_RENDER_ORDER = (
    _SECTION_GOALS,
    _SECTION_INFORMAL,
    _SECTION_STEPS,
    _SECTION_INCORRECT,
    _SECTION_LAST,
    _SECTION_NOTICE,
)


def _assemble(sections: dict) -> str:
    parts = [sections[name] for name in _SECTION_RENDER_ORDER if name in sections]
    if _SECTION_NOTICE in sections:
        # the repair notice carries its own closing [END]
        return "\n".join(parts)
    return "\n".join(parts + ["[END]"])


def promptify(
    bundle: PromptBundle,
    token_budget: int,
    style: str = "lean",
    estimator: Callable[[str], int] | None = None,
) -> AgentPrompt:
    """Render the agent prompt, trimming sections to fit the budget.

    Sections drop in a fixed priority order; the goals block (and a
    pending format-error notice) are never dropped. If even those exceed
    the budget, a PromptBudgetError is raised.
    """
    if bundle.current.is_error:
        raise ValueError("cannot promptify an error state")
    sections = _sections(bundle, with_retrieved=True)
    # the retrieved entries live inside the goals block; rebuilding without
    # them is how the "retrieved" drop level works
    drop_plan = list(_DROP_ORDER)
    while True:
        text = _assemble(sections)
        estimate = estimate_tokens(text, estimator)
        if estimate <= token_budget:
            return AgentPrompt(system_prompt(style), text, estimate)
        dropped = False
        while drop_plan:
            name = drop_plan.pop(0)
            if name == _SECTION_RETRIEVED:
                rebuilt = _render_goals(bundle.current, None)
                if rebuilt != sections[_SECTION_GOALS]:
                    sections[_SECTION_GOALS] = rebuilt
                    dropped = True
                    break
            elif name in sections:
                del sections[name]
                dropped = True
                break
        if not dropped:
            raise PromptBudgetError(
                f"token budget {token_budget} cannot fit the goals section "
                f"(needs about {estimate})"
            )


_RUN_TACTIC = "[RUN TACTIC]"
_END = "[END]"


def repair_message(response: str, stop_reason: str) -> str:
    stop = "length" if stop_reason == LENGTH_CAP else "stop"
    return (
        "[ERROR]\n"
        f"Invalid response:\n'{response}', \n"
        f"Stopping Reason: '{stop}'.\n"
        " Please respond only in the format specified.[END]"
    )


def parse_tactic(response: str, stop_reason: str = NATURAL_STOP):
    """Extract the single proof step from a model response.

    Complete responses look like "[RUN TACTIC] ... [END]". When the
    response was cut off by the model's output-token cap, the text after
    [RUN TACTIC] is salvaged. Everything else is a FormatError carrying
    the repair message to send back.
    """
    def fail(reason: str) -> FormatError:
        return FormatError(reason, repair_message(response, stop_reason))

    start = response.find(_RUN_TACTIC)
    if start < 0:
        return fail("response does not contain [RUN TACTIC]")
    body = response[start + len(_RUN_TACTIC):]
    end = body.find(_END)
    if end >= 0:
        tactic = body[:end].strip()
    elif stop_reason == LENGTH_CAP:
        tactic = body.strip()
    else:
        return fail("response does not contain [END]")
    if not tactic:
        return fail("empty tactic between [RUN TACTIC] and [END]")
    return ParsedAction(tactic)


# --- reference checker for the agent-prompt grammar ---

_KEYWORD_LINE = re.compile(
    r"\[(GOALS|GOAL|HYPOTHESES|HYPOTHESIS|DEFINITIONS|DEFINITION|THEOREMS|THEOREM|"
    r"INFORMAL-PROOF|STEPS|INCORRECT STEPS|LAST STEP|SUCCESS|ERROR MESSAGE|ERROR|END)\]"
)


class GrammarViolation(Exception):
    pass


def _expect(condition: bool, message: str):
    if not condition:
        raise GrammarViolation(message)


def check_agent_grammar(text: str) -> bool:
    """Validate an agent prompt against the grammar; raises on violation."""
    lines = text.split("\n")
    _expect(bool(lines) and lines[0] == "[GOALS]", "prompt must open with [GOALS]")
    _expect(lines[-1].endswith("[END]"), "prompt must close with [END]")
    i = 1
    goal_index = 0
    # goal blocks
    while i < len(lines) and lines[i].startswith("[GOAL] "):
        goal_index += 1
        _expect(lines[i] == f"[GOAL] {goal_index}", f"goal numbering broken at {lines[i]!r}")
        i += 1
        _expect(i < len(lines) and not _KEYWORD_LINE.match(lines[i]),
                f"[GOAL] {goal_index} has no goal text")
        while i < len(lines) and not _KEYWORD_LINE.match(lines[i]):
            i += 1
        for header, entry in (
            (f"[HYPOTHESES] {goal_index}", "[HYPOTHESIS] "),
            (f"[DEFINITIONS] {goal_index}", "[DEFINITION] "),
            (f"[THEOREMS] {goal_index}", "[THEOREM] "),
        ):
            if i < len(lines) and lines[i] == header:
                i += 1
                _expect(i < len(lines) and lines[i].startswith(entry),
                        f"{header} section is empty")
                while i < len(lines) and lines[i].startswith(entry):
                    i += 1
    _expect(goal_index >= 1, "at least one [GOAL] block required")

    if i < len(lines) and lines[i] == "[INFORMAL-PROOF]":
        i += 1
        _expect(i < len(lines) and not _KEYWORD_LINE.match(lines[i]),
                "[INFORMAL-PROOF] section is empty")
        while i < len(lines) and not _KEYWORD_LINE.match(lines[i]):
            i += 1
    if i < len(lines) and lines[i].startswith("[STEPS]"):
        _expect(lines[i].startswith("[STEPS][STEP]"), "[STEPS] must list [STEP] entries")
        i += 1
    if i < len(lines) and lines[i].startswith("[INCORRECT STEPS]"):
        _expect(lines[i].startswith("[INCORRECT STEPS][STEP]"),
                "[INCORRECT STEPS] must list [STEP] entries")
        i += 1
    if i < len(lines) and lines[i].startswith("[LAST STEP]"):
        _expect(lines[i] != "[LAST STEP]", "[LAST STEP] must carry the step text")
        i += 1
        _expect(i < len(lines) and (lines[i] == "[SUCCESS]" or lines[i].startswith("[ERROR MESSAGE]")),
                "[LAST STEP] must be followed by [SUCCESS] or [ERROR MESSAGE]")
        i += 1
        while i < len(lines) and not _KEYWORD_LINE.match(lines[i]):
            i += 1
    if i < len(lines) and lines[i] == "[ERROR]":
        # repair notice: free text ending with [END]
        i = len(lines) - 1
        _expect(lines[i].endswith("[END]"), "repair notice must end with [END]")
        return True
    _expect(i == len(lines) - 1 and lines[i] == "[END]",
            f"unexpected content near line {i + 1}: {lines[min(i, len(lines) - 1)]!r}")
    return True
