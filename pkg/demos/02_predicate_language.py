"""
The predicate language: matching tasks without loading anything
===============================================================

Skill cards describe when they apply with a tiny boolean language over the
observable surface of a task: prompt substrings, regular expressions, kind
tags, and attachment MIME tags. This demo parses a few expressions, shows
the precedence rules, evaluates them against contexts, round-trips them
through the printer, and provokes a positioned syntax error.

Run with: python3 demos/02_predicate_language.py
"""

from __future__ import annotations

from mesa import (
    Attachment,
    PredicateSyntaxError,
    TaskContext,
    eval_predicate,
    is_vacuous,
    parse_predicate,
    print_predicate,
)

# ---------------------------------------------------------------------------
# Four atoms. contains: checks the prompt for a substring, matches: runs a
# regular expression over it, kind: looks for a caller-supplied tag, and
# mime: looks for a tag on any attachment.

for source in (
    'contains:"invoice"',
    'matches:"v[0-9]+[.][0-9]+"',
    "kind:spreadsheet",
    "mime:csv",
):
    expr = parse_predicate(source)
    print(f"{source:<28} parses to {expr!r}")

# ---------------------------------------------------------------------------
# Operators. NOT binds tighter than AND, AND tighter than OR; parentheses
# override. The printer emits a canonical form with only the parentheses
# precedence requires, and parse(print(parse(s))) is always the same tree.

expr = parse_predicate('NOT kind:code AND contains:"report" OR mime:pdf')
print(f"\ncanonical form: {print_predicate(expr)}")
assert parse_predicate(print_predicate(expr)) == expr

# ---------------------------------------------------------------------------
# Evaluation. Only the context surface is consulted; nothing is fetched.

report_task = TaskContext(
    prompt="summarize the quarterly report",
    kind_tags=frozenset({"doc"}),
    attachments=(Attachment(mime_tag="pdf", bytes_len=120_000),),
)
code_task = TaskContext(
    prompt="refactor this report generator",
    kind_tags=frozenset({"code"}),
)

print(f"\n{print_predicate(expr)}")
print(f"  on the report task: {eval_predicate(expr, report_task)}")
print(f"  on the code task:   {eval_predicate(expr, code_task)}")

# ---------------------------------------------------------------------------
# Vacuity. A matcher that accepts everything is worthless as a routing
# signal; the card linter flags such predicates rather than banning them.

always = parse_predicate('contains:""')
narrow = parse_predicate('contains:"report" AND NOT kind:code')
print(f"\nis_vacuous(contains:\"\") = {is_vacuous(always)}")
print(f"is_vacuous(narrower)    = {is_vacuous(narrow)}")

# ---------------------------------------------------------------------------
# Errors point at the byte where parsing failed and list what was expected,
# which makes card files debuggable without reading the grammar.

broken = 'contains:"unterminated AND kind:doc'
try:
    parse_predicate(broken)
except PredicateSyntaxError as err:
    print(f"\n{broken}")
    print(" " * err.offset + "^")
    print(f"offset {err.offset}: {err}")
