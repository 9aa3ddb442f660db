"""Hand-built well-formedness corpus.

``MALFORMED`` holds fifty rejected inputs with the exact 1-based (line,
column) the parser must report, each derived by hand from the reporting
conventions (error at the offending token).  ``WELL_FORMED`` holds twenty-five
inputs the parser must accept.  A reference-oracle test cross-checks both
lists against ``xml.etree``: whatever the stdlib parser rejects, ours must
reject too (the reverse does not hold; this dialect is deliberately
stricter).
"""

from __future__ import annotations

# (name, input, expected line, expected column)
MALFORMED: list[tuple[str, str | bytes, int, int]] = [
    ("tag_mismatch", '<a><b></a></b>', 1, 9),
    ("unclosed_root", '<a>', 1, 4),
    ("duplicate_attribute", '<a x="1" x="2"/>', 1, 10),
    ("unknown_entity", '<a>&foo;</a>', 1, 4),
    ("numeric_charref", '<a>&#65;</a>', 1, 4),
    ("stray_ampersand", '<a>b & c</a>', 1, 6),
    ("text_only_document", 'hello', 1, 1),
    ("empty_document", '', 1, 1),
    ("whitespace_only", '   ', 1, 4),
    ("two_roots", '<a/><b/>', 1, 5),
    ("text_after_root", '<a/>tail', 1, 5),
    ("eof_in_start_tag", '<a b="1"', 1, 9),
    ("unquoted_attr_value", '<a b=1/>', 1, 6),
    ("missing_equals", '<a b"1"/>', 1, 5),
    ("eof_at_attr_value", '<a b = ', 1, 8),
    ("digit_element_name", '<1a/>', 1, 2),
    ("digit_child_name", '<a><1/></a>', 1, 5),
    ("bare_end_tag", '</a>', 1, 1),
    ("eof_in_end_tag", '<a></a', 1, 7),
    ("space_in_end_tag", '<a></ a>', 1, 6),
    ("unterminated_comment", '<a><!-- x</a>', 1, 4),
    ("double_dash_in_comment", '<a><!--a--b--></a>', 1, 9),
    ("cdata_section", '<a><![CDATA[x]]></a>', 1, 4),
    ("doctype", '<!DOCTYPE a><a/>', 1, 1),
    ("processing_instruction", '<a><?pi?></a>', 1, 4),
    ("php_style_pi", '<?php x?><a/>', 1, 1),
    ("lt_in_attr_value", '<a x="<"/>', 1, 7),
    ("unterminated_attr_value", '<a x="1', 1, 6),
    ("bad_entity_in_attr", '<a x="a&b"/>', 1, 8),
    ("attrs_not_separated", '<a x="1"y="2"/>', 1, 9),
    ("non_ascii_text", '<a>café</a>', 1, 7),
    ("non_ascii_bytes", b'<a>caf\xc3\xa9</a>', 1, 7),
    ("nul_in_text", '<a>\x00</a>', 1, 4),
    ("tab_in_attr_value", '<a x="a\tb"/>', 1, 8),
    ("mismatch_across_lines", '<root>\n  <item>\n</root>', 3, 3),
    ("unclosed_with_text", '<a>text', 1, 8),
    ("unclosed_after_child", '<a><b/>', 1, 8),
    ("space_after_lt", '< a/>', 1, 2),
    ("slash_space_in_tag", '<a/ >', 1, 3),
    ("wrong_end_tag", '<a></b>', 1, 6),
    ("inner_unclosed", '<a><b x="1"></a>', 1, 15),
    ("entity_before_root", '&amp;<a/>', 1, 1),
    ("entity_after_root", '<a/>&amp;', 1, 5),
    ("end_tag_missing_gt", '<a><b></b</a>', 1, 10),
    ("attr_name_missing", '<a ="v"/>', 1, 4),
    ("unclosed_nested_same_name", '<a><a></a>', 1, 11),
    ("comment_never_ends", '<a><!---></a>', 1, 4),
    ("non_ascii_attr_value", '<a attr="val大"/>', 1, 13),
    ("second_root_other_line", '<a>\n<b>\n</b>\n</a>\n<c/>', 5, 1),
    ("stray_end_after_root", '<a><b></b></a></a>', 1, 15),
]

WELL_FORMED: list[tuple[str, str]] = [
    ("self_closed", '<a/>'),
    ("empty_pair", '<a></a>'),
    ("two_attributes", '<a x="1" y="2"/>'),
    ("text_content", '<a>text</a>'),
    ("all_entities", '<a>&amp;&lt;&gt;&quot;&apos;</a>'),
    ("sibling_children", '<a><b/><b/><c/></a>'),
    ("xml_declaration", '<?xml version="1.0"?><a/>'),
    ("xml_declaration_encoding", '<?xml version="1.0" encoding="UTF-8"?>\n<a/>'),
    ("comments_outside_root", '<!-- c --><a/><!-- d -->'),
    ("comment_inside", '<a><!-- inner --><b/></a>'),
    ("surrounding_whitespace", '  <a/>  '),
    ("single_quoted_attr", "<a x='single'/>"),
    ("apostrophe_in_double_quotes", '<a x="mix\'d"/>'),
    ("entity_in_attr", '<a x="a&amp;b"/>'),
    ("punctuated_name", '<a.b-c_d/>'),
    ("underscore_name", '<_a/>'),
    ("multiline_text", '<a>line1\nline2\ttabbed</a>'),
    ("deep_nesting", '<a><b>deep<c>deeper</c></b></a>'),
    ("empty_attr_value", '<a x="">empty attr</a>'),
    ("mixed_content", '<a>text<b/>more</a>'),
    ("spaced_equals", '<a  x = "spaced"  />'),
    ("uppercase_names", '<A><B/></A>'),
    ("raw_gt_in_text", '<a>5 &gt; 3 and 2 > 1</a>'),
    ("repeated_children", '<root><step index="0"/><step index="1"/></root>'),
    ("single_dash_comment", '<a><!-- - --></a>'),
]
