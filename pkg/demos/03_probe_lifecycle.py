"""
Delayed escalation: probe before you pay for the body
=====================================================

Matching a skill card is cheap; loading its body is not. The escalation
machine inserts a probe between the two: a matched card is only loaded when
its cheap_probe predicate holds AND a quick confidence check says the agent
actually needs help. This demo drives the machine by hand, then lets
build_candidates run it and proves, with a counting loader, that bodies are
read exactly once per load and never for skipped cards.

Run with: python3 demos/03_probe_lifecycle.py
"""

from __future__ import annotations

from mesa import (
    PROBE_COST,
    PROBE_SLACK,
    CardRegistry,
    IllegalTransitionError,
    OffloadingType,
    Provenance,
    RoutingConfig,
    SkillCard,
    TaskContext,
    begin,
    build_candidates,
    bypass,
    parse_predicate,
    resolve,
    run_probe,
)

# ---------------------------------------------------------------------------
# A card and two tasks: one the agent finds hard, one it knows cold.

card = SkillCard(
    id="snail_facts",
    name="Gastropod reference",
    description="Everything about snails.",
    apply_when=parse_predicate('contains:"snail"'),
    cheap_probe=parse_predicate("kind:question"),
    offloading_type=OffloadingType.EPISTEMIC,
    source_trust=0.9,
    provenance=Provenance.FIRST_PARTY,
    stale=False,
    body_ref="inline:the reference text",
)

hard_task = TaskContext(
    prompt="how many teeth does a garden snail have",
    kind_tags=frozenset({"question"}),
)
easy_task = TaskContext(
    prompt="is a snail an animal",
    kind_tags=frozenset({"question"}),
)


class SignalBackend:
    """Answers probe checks from a table; everything else is fixed."""

    def __init__(self, probe_table: dict[str, float]) -> None:
        self.probe_table = probe_table
        self.probe_calls = 0

    def self_confidence(self, ctx):
        return 0.30

    def source_confidence(self, ctx, channel):
        return 0.80

    def probe_signal(self, ctx, card_id):
        self.probe_calls += 1
        return self.probe_table[ctx.prompt]

    def answer(self, ctx, variant_key):
        return "about 14000"

    def self_report_tags(self, ctx):
        return frozenset()


backend = SignalBackend(
    probe_table={hard_task.prompt: 0.20, easy_task.prompt: 0.95}
)
cfg = RoutingConfig()
threshold = cfg.self_low + PROBE_SLACK
print(f"probe passes when signal < self_low + slack = {threshold:.2f}")

# ---------------------------------------------------------------------------
# The machine by hand: Matched -> Probed -> Loaded or Skipped. Each probe
# charges PROBE_COST exactly once; illegal edges raise.

for name, task in (("hard", hard_task), ("easy", easy_task)):
    state = begin(card)
    state = run_probe(state, card, task, backend, cfg)
    state = resolve(state)
    print(
        f"{name} task: probe={backend.probe_table[task.prompt]:.2f} "
        f"-> passed={state.passed} -> {state.stage.value} "
        f"(charged {state.probe_cost_charged:.2f}, expected {PROBE_COST:.2f})"
    )

try:
    resolve(begin(card))
except IllegalTransitionError as err:
    print(f"skipping the probe stage is rejected: {err}")

# bypass is the one legal shortcut, reserved for probe-disabled conditions
print(f"bypass() jumps Matched -> {bypass(begin(card)).stage.value} (no charge)")

# ---------------------------------------------------------------------------
# The same machinery inside build_candidates, with a loader that counts
# body reads. Loads are lazy: the easy task matches the card but never
# pays for the body.

reads: list[str] = []
registry = CardRegistry(cards=(card,)).with_body_loader(
    lambda c: reads.append(c.id) or "the reference text"
)

for name, task in (("hard", hard_task), ("easy", easy_task)):
    candidates, cv, traces = build_candidates(
        task, registry, backend, cfg, probe_enabled=True
    )
    skills = [a.card_id for a in candidates if a.card_id is not None]
    print(
        f"{name} task: trace={[t.stage.value for t in traces]} "
        f"skill candidates={skills} body reads so far={reads}"
    )

assert reads == ["snail_facts"], "exactly one paid load across both tasks"
