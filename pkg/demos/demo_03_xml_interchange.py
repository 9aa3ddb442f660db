"""XML as the interchange surface: parsing, validation, paths, templates.

A work order serializes to a canonical document, validates against the
shipped grammar, and renders through a report template; the same machinery
rejects malformed input with an exact position.
"""

from datetime import date

from orbitflow import (
    CorrectionLevel,
    IdSequence,
    Media,
    Outcome,
    ProductSpec,
    ProductType,
    advance,
    create_work_order,
    default_rule_set,
)
from orbitflow.interchange import from_xml, to_xml, to_xml_text, workorder_schema
from orbitflow.templates import apply_template, eval_path
from orbitflow.xmlcore import NotWellFormed, parse
from orbitflow.xmlschema import validate

rules = default_rule_set()
wo = create_work_order(
    ProductSpec("CARTOSAT-2", "PAN", ProductType.STANDARD,
                CorrectionLevel.GEO, Media.DIGITAL, 500, 247, date(2026, 1, 2)),
    rules, clock=0.0, ids=IdSequence(),
)
wo, _ = advance(wo, Outcome.START, 100.0)
wo, _ = advance(wo, Outcome.COMPLETE, 400.0)

text = to_xml_text(wo)
print("canonical document (first 160 chars):")
print(" ", text[:160], "...")

doc = parse(text)
print("\nvalidates against the shipped grammar:",
      validate(doc, workorder_schema()) == [])
print("round-trips losslessly:", from_xml(doc) == wo)

print("\npath queries:")
print("  id        ->", eval_path(doc, "/work-order@id"))
print("  statuses  ->", eval_path(doc, "/work-order/routing/step@status"))

report = apply_template(doc, (
    "order {/work-order@id} [{/work-order@status}]\n"
    "chain: {for /work-order/routing/step}{step@center} {end}\n"
))
print("\ntemplated report:")
print(report)

# Validation reports violations as data rather than raising.
broken = to_xml(wo)
del broken.attributes["id"]
for violation in validate(broken, workorder_schema()):
    print("violation:", violation)

# Well-formedness errors carry line and column.
try:
    parse("<a><b></a></b>")
except NotWellFormed as err:
    print(f"\nrejected at {err.line}:{err.column}: {err.reason}")
