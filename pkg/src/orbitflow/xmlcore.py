"""Self-contained XML subset: parser, well-formedness checks, canonical writer.

Supported: an optional XML declaration, elements, attributes quoted with
single or double quotes, character data, the five predefined entities
(&amp; &lt; &gt; &quot; &apos;) and comments.  Not supported: CDATA sections,
processing instructions, DOCTYPE, namespaces, numeric character references,
and anything outside ASCII.  Attribute values must be printable ASCII
(0x20..0x7E); text may additionally contain tab, newline and carriage return.

The canonical writer emits attributes in stored order with double quotes,
escapes all five entity characters everywhere, self-closes only genuinely
empty elements, and adds no whitespace of its own, so a serialized document
is a single line unless its character data contains newlines.  ``parse``
after ``serialize`` is the identity on valid trees.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")

ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}

_ESCAPES = [
    ("&", "&amp;"),
    ("<", "&lt;"),
    (">", "&gt;"),
    ('"', "&quot;"),
    ("'", "&apos;"),
]


class NotWellFormed(Exception):
    """Input rejected by the parser, with a 1-based source position."""

    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"{line}:{column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


class InvalidName(Exception):
    """An element or attribute name outside the accepted subset."""


@dataclass
class XmlNode:
    """One element: attributes in stored order, children in document order,
    and the concatenation of its direct character data."""

    name: str
    attributes: dict[str, str] = field(default_factory=dict)
    children: list["XmlNode"] = field(default_factory=list)
    text: str = ""

    def find(self, name: str) -> "XmlNode | None":
        for child in self.children:
            if child.name == name:
                return child
        return None

    def find_all(self, name: str) -> list["XmlNode"]:
        return [c for c in self.children if c.name == name]


# A parsed document is represented by its root element.
XmlDocument = XmlNode


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.n = len(text)
        self.pos = 0
        self.line = 1
        self.col = 1

    # -- low-level cursor ---------------------------------------------------

    def error(self, reason: str, line: int | None = None, col: int | None = None):
        raise NotWellFormed(line or self.line, col or self.col, reason)

    def at(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.n else ""

    def take(self) -> str:
        ch = self.text[self.pos]
        code = ord(ch)
        if code > 0x7E:
            self.error(f"non-ASCII or control character 0x{code:02x}")
        if code < 0x20 and ch not in "\t\n\r":
            self.error(f"non-ASCII or control character 0x{code:02x}")
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def expect(self, s: str, reason: str) -> None:
        if not self.at(s):
            self.error(reason)
        for _ in s:
            self.take()

    def skip_ws(self) -> bool:
        skipped = False
        while self.pos < self.n and self.peek() in " \t\n\r":
            self.take()
            skipped = True
        return skipped

    # -- tokens -------------------------------------------------------------

    def parse_name(self, what: str) -> str:
        m = NAME_RE.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        name = m.group(0)
        # Names never contain newlines, so the column advances linearly.
        self.pos += len(name)
        self.col += len(name)
        return name

    def parse_entity(self) -> str:
        line, col = self.line, self.col
        self.take()  # '&'
        name = ""
        while self.pos < self.n and len(name) <= 4:
            ch = self.peek()
            if not ch.isalpha():
                break
            name += self.take()
        if self.peek() != ";" or name not in ENTITIES:
            self.error("stray '&' (not a recognized entity)", line, col)
        self.take()  # ';'
        return ENTITIES[name]

    def parse_comment(self) -> None:
        line, col = self.line, self.col
        for _ in "<!--":
            self.take()
        while True:
            if self.pos >= self.n:
                self.error("unterminated comment", line, col)
            if self.at("-->"):
                for _ in "-->":
                    self.take()
                return
            if self.at("--"):
                self.error("'--' is not allowed inside a comment")
            self.take()

    def skip_misc(self) -> None:
        """Whitespace and comments, as allowed outside the root element."""
        while self.pos < self.n:
            if self.peek() in " \t\n\r":
                self.take()
            elif self.at("<!--"):
                self.parse_comment()
            else:
                return

    def skip_xml_decl(self) -> None:
        if not self.at("<?xml"):
            return
        follow = self.text[self.pos + 5 : self.pos + 6]
        if follow not in (" ", "\t", "\n", "\r", "?"):
            return  # an element can't start '<?', caught later as a PI
        line, col = self.line, self.col
        while not self.at("?>"):
            if self.pos >= self.n:
                self.error("unterminated XML declaration", line, col)
            self.take()
        self.take()
        self.take()

    # -- structure ----------------------------------------------------------

    def parse_attr_value(self) -> str:
        if self.pos >= self.n or self.peek() not in "'\"":
            self.error("attribute value must be quoted")
        open_line, open_col = self.line, self.col
        quote = self.take()
        out: list[str] = []
        while True:
            if self.pos >= self.n:
                self.error("unterminated attribute value", open_line, open_col)
            ch = self.peek()
            if ch == quote:
                self.take()
                return "".join(out)
            if ch == "<":
                self.error("'<' is not allowed inside an attribute value")
            if ch in "\t\n\r":
                self.error("whitespace control character in attribute value")
            if ch == "&":
                out.append(self.parse_entity())
            else:
                out.append(self.take())

    def parse_element(self) -> XmlNode:
        self.take()  # '<'
        name = self.parse_name("element name")
        node = XmlNode(name=name)
        # start tag: attributes until '>' or '/>'
        while True:
            had_ws = self.skip_ws()
            if self.pos >= self.n:
                self.error("unexpected end of input inside start tag")
            if self.at("/>"):
                self.take()
                self.take()
                return node
            if self.at(">"):
                self.take()
                break
            if not had_ws:
                self.error("expected whitespace before attribute")
            attr_line, attr_col = self.line, self.col
            attr = self.parse_name("attribute name")
            if attr in node.attributes:
                self.error(f"duplicate attribute {attr!r}", attr_line, attr_col)
            self.skip_ws()
            self.expect("=", "expected '=' after attribute name")
            self.skip_ws()
            node.attributes[attr] = self.parse_attr_value()
        # content until matching end tag
        text_parts: list[str] = []
        while True:
            if self.pos >= self.n:
                self.error(f"unclosed element <{name}>")
            if self.at("</"):
                self.take()
                self.take()
                got_line, got_col = self.line, self.col
                got = self.parse_name("closing tag name")
                if got != name:
                    self.error(
                        f"mismatched closing tag: expected </{name}>, got </{got}>",
                        got_line,
                        got_col,
                    )
                self.skip_ws()
                self.expect(">", "expected '>' to close end tag")
                node.text = "".join(text_parts)
                return node
            if self.at("<!--"):
                self.parse_comment()
            elif self.at("<!"):
                self.error("unsupported markup (CDATA/DOCTYPE are not accepted)")
            elif self.at("<?"):
                self.error("processing instructions are not supported")
            elif self.at("<"):
                node.children.append(self.parse_element())
            elif self.at("&"):
                text_parts.append(self.parse_entity())
            else:
                text_parts.append(self.take())

    def parse_document(self) -> XmlNode:
        self.skip_xml_decl()
        self.skip_misc()
        if self.pos >= self.n:
            self.error("no root element")
        if not self.at("<"):
            self.error("character data outside the root element")
        if self.at("<!") or self.at("<?") or self.at("</"):
            # Let element parsing produce the precise reason.
            if self.at("<!--"):  # skip_misc already ate comments; can't happen
                self.error("unexpected comment")
            if self.at("<!"):
                self.error("unsupported markup (CDATA/DOCTYPE are not accepted)")
            if self.at("<?"):
                self.error("processing instructions are not supported")
            self.error("expected element name")
        root = self.parse_element()
        self.skip_misc()
        if self.pos < self.n:
            if self.at("<"):
                self.error("multiple root elements")
            self.error("character data outside the root element")
        return root


def parse(data: str | bytes) -> XmlNode:
    """Parse ``data`` into an element tree, or raise :class:`NotWellFormed`."""
    if isinstance(data, (bytes, bytearray)):
        try:
            text = bytes(data).decode("ascii")
        except UnicodeDecodeError as exc:
            prefix = bytes(data)[: exc.start]
            line = prefix.count(b"\n") + 1
            col = exc.start - (prefix.rfind(b"\n") + 1) + 1
            raise NotWellFormed(line, col, "non-ASCII byte in input") from None
    else:
        text = data
    return _Parser(text).parse_document()


# ---------------------------------------------------------------------------
# Canonical serialization


def _escape(s: str) -> str:
    for raw, rep in _ESCAPES:
        s = s.replace(raw, rep)
    return s


def _check_name(name: str) -> None:
    m = NAME_RE.match(name)
    if not m or m.group(0) != name:
        raise InvalidName(f"invalid XML name {name!r}")


def _check_chars(s: str, *, allow_line_ws: bool, what: str) -> None:
    extra = "\t\n\r" if allow_line_ws else ""
    for ch in s:
        if not (0x20 <= ord(ch) <= 0x7E or ch in extra):
            raise ValueError(f"illegal character 0x{ord(ch):02x} in {what}")


def serialize(doc: XmlNode) -> str:
    """Canonical text form; reparsing it yields an equal tree."""
    out: list[str] = []
    _serialize_into(doc, out)
    return "".join(out)


def _serialize_into(node: XmlNode, out: list[str]) -> None:
    _check_name(node.name)
    out.append("<")
    out.append(node.name)
    for attr, value in node.attributes.items():
        _check_name(attr)
        _check_chars(value, allow_line_ws=False, what=f"attribute {attr!r}")
        out.append(f' {attr}="{_escape(value)}"')
    if not node.children and node.text == "":
        out.append("/>")
        return
    out.append(">")
    _check_chars(node.text, allow_line_ws=True, what="character data")
    out.append(_escape(node.text))
    for child in node.children:
        _serialize_into(child, out)
    out.append(f"</{node.name}>")
