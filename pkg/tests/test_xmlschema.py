from __future__ import annotations

import pytest

from orbitflow.xmlcore import XmlNode, parse
from orbitflow.xmlschema import InvalidSchema, parse_schema, validate

LIBRARY_SCHEMA = parse_schema(
    """
    root library
    element library (book+, note?)
    element book (title, author*)
    element title TEXT
    element author EMPTY
    element note TEXT
    attribute library name CDATA REQUIRED
    attribute library kind (PUBLIC|PRIVATE) DEFAULT "PUBLIC"
    attribute book year CDATA IMPLIED
    attribute author name CDATA REQUIRED
    """
)


def _violation_rules(report):
    return [v.rule for v in report]


class TestValidate:
    def test_valid_document(self):
        doc = parse(
            '<library name="central">'
            '<book year="1999"><title>t</title><author name="x"/></book>'
            "</library>"
        )
        assert validate(doc, LIBRARY_SCHEMA) == []

    def test_missing_required_attribute_names_everything(self):
        doc = parse("<library><book><title>t</title></book></library>")
        report = validate(doc, LIBRARY_SCHEMA)
        assert len(report) == 1
        v = report[0]
        assert v.element == "library"
        assert v.attribute == "name"
        assert v.rule == "attribute-required"

    def test_multiplicity_plus_demands_one(self):
        doc = parse('<library name="x"/>')
        report = validate(doc, LIBRARY_SCHEMA)
        assert _violation_rules(report) == ["content-model"]
        assert "one or more <book>" in report[0].message

    def test_multiplicity_question_allows_zero_or_one(self):
        base = '<book><title>t</title></book>'
        ok = parse(f'<library name="x">{base}<note>n</note></library>')
        assert validate(ok, LIBRARY_SCHEMA) == []
        doubled = parse(
            f'<library name="x">{base}<note>n</note><note>m</note></library>'
        )
        assert _violation_rules(validate(doubled, LIBRARY_SCHEMA)) == ["content-model"]

    def test_sequence_order_enforced(self):
        doc = parse(
            '<library name="x"><book><author name="a"/><title>t</title></book>'
            "</library>"
        )
        report = validate(doc, LIBRARY_SCHEMA)
        assert "content-model" in _violation_rules(report)

    def test_unexpected_child_flagged(self):
        doc = parse(
            '<library name="x"><book><title>t</title><extra/></book></library>'
        )
        report = validate(doc, LIBRARY_SCHEMA)
        rules = _violation_rules(report)
        assert "element-declared" in rules  # <extra> itself
        assert "content-model" in rules  # its position in <book>

    def test_enum_attribute_checked(self):
        doc = parse(
            '<library name="x" kind="SECRET"><book><title>t</title></book>'
            "</library>"
        )
        report = validate(doc, LIBRARY_SCHEMA)
        assert _violation_rules(report) == ["attribute-enum"]

    def test_default_materialized(self):
        doc = parse('<library name="x"><book><title>t</title></book></library>')
        assert validate(doc, LIBRARY_SCHEMA) == []
        assert doc.attributes["kind"] == "PUBLIC"

    def test_empty_element_must_be_empty(self):
        doc = parse(
            '<library name="x"><book><title>t</title>'
            '<author name="a">text</author></book></library>'
        )
        report = validate(doc, LIBRARY_SCHEMA)
        assert "empty-content" in _violation_rules(report)

    def test_text_where_sequence_expected(self):
        doc = parse('<library name="x">stray<book><title>t</title></book></library>')
        report = validate(doc, LIBRARY_SCHEMA)
        assert "character-data" in _violation_rules(report)

    def test_wrong_root(self):
        doc = parse("<shelf/>")
        report = validate(doc, LIBRARY_SCHEMA)
        assert report[0].rule == "root"

    def test_whitespace_between_children_tolerated(self):
        doc = parse(
            '<library name="x">\n  <book>\n    <title>t</title>\n  </book>\n'
            "</library>"
        )
        assert validate(doc, LIBRARY_SCHEMA) == []

    def test_undeclared_attribute_flagged(self):
        doc = parse(
            '<library name="x" color="red"><book><title>t</title></book></library>'
        )
        assert _violation_rules(validate(doc, LIBRARY_SCHEMA)) == ["attribute-declared"]

    def test_validation_is_monotone_under_undeclared_child(self):
        doc = parse(
            '<library name="x"><book><title>t</title></book></library>'
        )
        assert validate(doc, LIBRARY_SCHEMA) == []
        doc.children[0].children.append(XmlNode("rogue"))
        assert len(validate(doc, LIBRARY_SCHEMA)) >= 1


class TestSchemaGrammar:
    def test_undeclared_child_reference_rejected(self):
        with pytest.raises(InvalidSchema):
            parse_schema("root a\nelement a (b)\n")

    def test_undeclared_root_rejected(self):
        with pytest.raises(InvalidSchema):
            parse_schema("root a\nelement b EMPTY\n")

    def test_default_requires_value(self):
        with pytest.raises(InvalidSchema):
            parse_schema("root a\nelement a EMPTY\nattribute a x CDATA DEFAULT\n")

    def test_comments_and_blank_lines_ignored(self):
        schema = parse_schema("# header\n\nroot a\nelement a EMPTY  # trailing\n")
        assert schema.root == "a"
