"""
Routing one task: dual confidence, costs, and the vigilance gate
================================================================

A single routing decision built entirely in memory. We declare a task, a
small registry with one trusted card and one shady card, and the confidence
signals a model backend would normally produce. Then we watch select_action
score every candidate, gate the shady card out of play, and pick a winner.

Run with: python3 demos/01_route_one_task.py
"""

from __future__ import annotations

from mesa import (
    Action,
    ActionVariant,
    CardRegistry,
    ConfidenceVector,
    OffloadingType,
    Provenance,
    RoutingConfig,
    SkillCard,
    TaskContext,
    effective_trust,
    parse_predicate,
    score_key,
    select_action,
)

# ---------------------------------------------------------------------------
# The task. Kind tags and attachments are the only structure predicates see.

ctx = TaskContext(
    prompt="convert this legacy timestamp table to ISO 8601",
    kind_tags=frozenset({"doc", "legacy_format"}),
)

# ---------------------------------------------------------------------------
# Two skill cards. The first is a well-provenanced first-party playbook.
# The second claims to be perfect for the job but arrives from an unvetted
# community source with low trust: exactly what the gate exists to stop.

trusted = SkillCard(
    id="timestamp_playbook",
    name="Timestamp conversion playbook",
    description="Recipes for legacy timestamp formats.",
    apply_when=parse_predicate('contains:"timestamp" AND kind:legacy_format'),
    cheap_probe=parse_predicate("kind:doc"),
    offloading_type=OffloadingType.PROCEDURAL,
    source_trust=0.9,
    provenance=Provenance.FIRST_PARTY,
    stale=False,
    body_ref="inline:use the conversion table",
)

shady = SkillCard(
    id="free_converter_9000",
    name="Free Converter 9000",
    description="Handles every format, trust us.",
    apply_when=parse_predicate('contains:"timestamp"'),
    cheap_probe=parse_predicate("kind:doc"),
    offloading_type=OffloadingType.PROCEDURAL,
    source_trust=0.35,
    provenance=Provenance.COMMUNITY_UNVERIFIED,
    stale=False,
    body_ref="inline:???",
)

registry = CardRegistry(cards=(trusted, shady))

# ---------------------------------------------------------------------------
# Candidate actions and the confidence vector. Self-confidence is low (the
# agent does not remember these formats); both cards scream relevance, and
# the generic tool channel is middling.

candidates = [
    Action(ActionVariant.DIRECT, cost=0.0),
    Action(ActionVariant.STOP, utility_direct=0.0, cost=0.0),
    Action(ActionVariant.CALL_TOOL, cost=0.3),
    Action(ActionVariant.VERIFY, cost=0.3),
    Action(ActionVariant.LOAD_SKILL, card_id="timestamp_playbook", cost=0.5),
    Action(ActionVariant.LOAD_SKILL, card_id="free_converter_9000", cost=0.5),
]

cv = ConfidenceVector(
    p_self=0.3,
    source_confidences={
        "__tool__": 0.6,
        "__verify__": 0.1,
        "timestamp_playbook": 0.95,
        "free_converter_9000": 0.99,
    },
)

cfg = RoutingConfig()
print(f"alpha={cfg.alpha}  lambda={cfg.cost_lambda}  trust_gate={cfg.trust_gate}")
for card in registry:
    print(f"  {card.id}: source_trust={card.source_trust}  "
          f"effective_trust={effective_trust(card):.2f}")

# ---------------------------------------------------------------------------
# Decide. Direct and Stop are weighted by self-confidence; offloads by
# source confidence times the vigilance prior, minus the cost penalty.

decision = select_action(ctx, candidates, cv, cfg, registry)

print("\nscores (gated candidates carry no score):")
for action in candidates:
    key = score_key(action)
    shown = f"{decision.scores[key]:+.4f}" if key in decision.scores else "gated"
    print(f"  {key:<35} {shown}")
print(f"\ngated cards: {list(decision.gated_cards)}")
print(f"chosen: {score_key(decision.chosen)}")

# The shady card had the highest relevance of all sources, but its
# effective trust (0.35) sits below the 0.7 gate, so it never even
# received a score. The trusted playbook wins on merit.

# ---------------------------------------------------------------------------
# The same decision under a different temperament. Raising alpha shifts
# weight toward parametric self-trust; with alpha at 0.95 the engine would
# rather answer directly than pay for any offload.

confident_cfg = RoutingConfig(alpha=0.95)
confident = select_action(ctx, candidates, cv, confident_cfg, registry)
print(f"\nwith alpha=0.95 the choice becomes: {score_key(confident.chosen)}")
