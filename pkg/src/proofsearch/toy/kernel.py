"""Tactic semantics of the toy prover.

Every tactic acts on the first obligation under the deterministic order of
`core.ordered_obligations`. Failures never raise: they come back as
absorbing error states whose message is a stable string (golden tests on
prompt rendering rely on that).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..core import Obligation, ProofEnvironment, ProofState, ordered_obligations
from .tactics import (
    Apply,
    Assumption,
    Exact,
    Intro,
    Refl,
    Rw,
    Split,
    ToyTactic,
    ToyTacticParseError,
    parse_toy_tactic,
)
from .terms import And, Eq, Implies, Term, parse_term, print_term


@dataclass(frozen=True)
class ToyTheorem:
    """A named initial obligation plus the lemmas its proof may use."""

    name: str
    goal: Term
    hypotheses: tuple = ()  # (name, Term) pairs
    lemmas: tuple = ()  # (name, Term) pairs
    category: str | None = None

    def initial_state(self) -> ProofState:
        hyps = {name: print_term(term) for name, term in self.hypotheses}
        return ProofState.of([Obligation.make(print_term(self.goal), hyps)])

    def statement(self) -> str:
        parts = [f"{name} : {print_term(term)}" for name, term in self.hypotheses]
        parts.append(print_term(self.goal))
        return " ⊢ ".join([", ".join(parts[:-1]), parts[-1]]) if len(parts) > 1 else parts[-1]


def _rewrite(term: Term, old: Term, new: Term) -> tuple:
    """Replace every occurrence of `old` in `term` by `new`; returns the
    rewritten term and the occurrence count."""
    if term == old:
        return new, 1
    if isinstance(term, (Implies, And, Eq)):
        lhs, n1 = _rewrite(term.lhs, old, new)
        rhs, n2 = _rewrite(term.rhs, old, new)
        return type(term)(lhs, rhs), n1 + n2
    return term, 0


def _step(
    focused: Obligation, tactic: ToyTactic, lemmas: Mapping[str, Term]
) -> list | str:
    """Apply a parsed tactic to one obligation.

    Returns the replacement obligations on success, or an error message.
    """
    goal = parse_term(focused.goal)
    hyps = focused.hypothesis_map()

    def equation_named(name: str) -> Term | None:
        if name in hyps:
            return parse_term(hyps[name])
        if name in lemmas:
            return lemmas[name]
        return None

    if isinstance(tactic, Intro):
        if not isinstance(goal, Implies):
            return "intro failed: goal is not an implication"
        if tactic.name in hyps:
            return f"intro failed: hypothesis name '{tactic.name}' already in use"
        new_hyps = dict(hyps)
        new_hyps[tactic.name] = print_term(goal.lhs)
        return [Obligation.make(print_term(goal.rhs), new_hyps)]

    if isinstance(tactic, Split):
        if not isinstance(goal, And):
            return "split failed: goal is not a conjunction"
        return [
            Obligation.make(print_term(goal.lhs), hyps),
            Obligation.make(print_term(goal.rhs), hyps),
        ]

    if isinstance(tactic, Assumption):
        if focused.goal in focused.hypothesis_contents():
            return []
        return "assumption failed: no hypothesis matches the goal"

    if isinstance(tactic, Exact):
        if tactic.name not in hyps:
            return f"exact failed: no hypothesis named '{tactic.name}'"
        if hyps[tactic.name] != focused.goal:
            return f"exact failed: hypothesis '{tactic.name}' does not match the goal"
        return []

    if isinstance(tactic, Refl):
        if not isinstance(goal, Eq):
            return "refl failed: goal is not an equality"
        if goal.lhs != goal.rhs:
            return "refl failed: sides of the equality are not syntactically equal"
        return []

    if isinstance(tactic, Rw):
        equation = equation_named(tactic.name)
        if equation is None:
            return f"rw failed: no equation named '{tactic.name}'"
        if not isinstance(equation, Eq):
            return f"rw failed: '{tactic.name}' is not an equation"
        old, new = (equation.rhs, equation.lhs) if tactic.reverse else (equation.lhs, equation.rhs)
        rewritten, count = _rewrite(goal, old, new)
        if count == 0:
            return f"rw failed: no occurrences of '{print_term(old)}' in the goal"
        return [Obligation.make(print_term(rewritten), hyps)]

    if isinstance(tactic, Apply):
        lemma = lemmas.get(tactic.name)
        if lemma is None:
            return f"apply failed: no lemma named '{tactic.name}'"
        if isinstance(lemma, Implies):
            if print_term(lemma.rhs) != focused.goal:
                return f"apply failed: conclusion of '{tactic.name}' does not match the goal"
            return [Obligation.make(print_term(lemma.lhs), hyps)]
        if print_term(lemma) != focused.goal:
            return f"apply failed: '{tactic.name}' does not match the goal"
        return []

    raise TypeError(f"not a toy tactic: {tactic!r}")


def apply_toy_tactic(
    state: ProofState, tactic: str | ToyTactic, lemmas: Mapping[str, Term]
) -> ProofState:
    """Pure transition function of the toy environment.

    Error states absorb every tactic; all failures (including tactic parse
    errors) return an error state carrying the input obligations.
    """
    if state.is_error:
        return state
    if state.is_qed:
        return ProofState.error(state.obligations, "no goals: the proof is already complete")
    if isinstance(tactic, str):
        try:
            tactic = parse_toy_tactic(tactic)
        except ToyTacticParseError as exc:
            return ProofState.error(state.obligations, str(exc))
    obligations = ordered_obligations(state)
    result = _step(obligations[0], tactic, lemmas)
    if isinstance(result, str):
        return ProofState.error(state.obligations, result)
    return ProofState.of(result + obligations[1:])


class ToyEnvironment(ProofEnvironment):
    """ProofEnvironment over a single toy theorem (one episode, one env)."""

    def __init__(self, theorem: ToyTheorem):
        self.theorem = theorem
        self._lemmas = dict(theorem.lemmas)

    def initial_state(self, theorem_id: str) -> ProofState:
        if theorem_id != self.theorem.name:
            raise KeyError(f"environment is bound to {self.theorem.name!r}, not {theorem_id!r}")
        return self.theorem.initial_state()

    def apply_tactic(self, state: ProofState, tactic: str) -> ProofState:
        return apply_toy_tactic(state, tactic, self._lemmas)

    def tactic_alphabet(self) -> str:
        return "intro NAME | split | assumption | exact NAME | refl | rw [<-] NAME | apply NAME"
