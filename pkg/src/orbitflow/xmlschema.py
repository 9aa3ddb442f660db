"""Grammar-based document validation, in the spirit of a DTD.

A schema declares, per element, a content model (an ordered sequence of child
names with multiplicities, text-only content, or EMPTY) and an attribute list
(CDATA or enumerated, required / implied / defaulted).  Validation walks the
tree and reports violations as data; it raises nothing.  Declared attribute
defaults are materialized onto the document as a side effect, mirroring how
DTD processors hand applications a normalized view.

Schemas are written in a small line-oriented grammar::

    root work-order
    element routing (step*)
    element note TEXT
    element product EMPTY
    attribute step center (URP|DP|QC) REQUIRED
    attribute step note CDATA IMPLIED
    attribute report kind CDATA DEFAULT "summary"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .xmlcore import NAME_RE, XmlNode

MULTIPLICITIES = ("1", "?", "*", "+")


class InvalidSchema(Exception):
    pass


@dataclass(frozen=True)
class ChildSpec:
    name: str
    mult: str  # one of MULTIPLICITIES


@dataclass(frozen=True)
class ContentModel:
    kind: str  # SEQUENCE | TEXT | EMPTY
    children: tuple[ChildSpec, ...] = ()


@dataclass(frozen=True)
class AttrDecl:
    name: str
    values: Optional[tuple[str, ...]]  # None means CDATA
    presence: str  # REQUIRED | IMPLIED | DEFAULT
    default: Optional[str] = None


@dataclass(frozen=True)
class SchemaDecl:
    root: str
    elements: dict[str, ContentModel]
    attributes: dict[str, tuple[AttrDecl, ...]]

    def validate_decl(self) -> None:
        if self.root not in self.elements:
            raise InvalidSchema(f"root element {self.root!r} is not declared")
        for elem, model in self.elements.items():
            for child in model.children:
                if child.name not in self.elements:
                    raise InvalidSchema(
                        f"element {elem!r} references undeclared child {child.name!r}"
                    )
        for elem in self.attributes:
            if elem not in self.elements:
                raise InvalidSchema(
                    f"attribute list for undeclared element {elem!r}"
                )


@dataclass(frozen=True)
class Violation:
    element: str
    attribute: Optional[str]
    rule: str
    message: str
    path: str

    def __str__(self) -> str:
        where = f"{self.path}@{self.attribute}" if self.attribute else self.path
        return f"{where}: [{self.rule}] {self.message}"


def validate(doc: XmlNode, schema: SchemaDecl) -> list[Violation]:
    """Check ``doc`` against ``schema``; an empty report means valid.

    Attributes declared with a default are written onto ``doc`` where absent.
    """
    report: list[Violation] = []
    if doc.name != schema.root:
        report.append(
            Violation(
                element=doc.name,
                attribute=None,
                rule="root",
                message=f"root element must be <{schema.root}>, got <{doc.name}>",
                path=f"/{doc.name}",
            )
        )
    _walk(doc, f"/{doc.name}", schema, report)
    return report


def _walk(node: XmlNode, path: str, schema: SchemaDecl, report: list[Violation]) -> None:
    model = schema.elements.get(node.name)
    if model is None:
        report.append(
            Violation(node.name, None, "element-declared",
                      f"element <{node.name}> is not declared", path)
        )
    else:
        _check_content(node, path, model, report)
        _check_attributes(node, path, schema, report)
    # Children are validated regardless, so one unknown wrapper does not
    # silence every violation beneath it.
    seen: dict[str, int] = {}
    for child in node.children:
        seen[child.name] = seen.get(child.name, 0) + 1
        _walk(child, f"{path}/{child.name}[{seen[child.name]}]", schema, report)


def _check_content(node: XmlNode, path: str, model: ContentModel,
                   report: list[Violation]) -> None:
    def bad(rule: str, message: str) -> None:
        report.append(Violation(node.name, None, rule, message, path))

    if model.kind == "EMPTY":
        if node.children:
            bad("empty-content", f"<{node.name}> is declared EMPTY but has children")
        if node.text != "":
            bad("empty-content", f"<{node.name}> is declared EMPTY but has text")
        return
    if model.kind == "TEXT":
        if node.children:
            bad("text-only", f"<{node.name}> allows only character data")
        return
    # SEQUENCE: ordered children with multiplicities; whitespace text allowed.
    if node.text.strip():
        bad("character-data", f"unexpected character data inside <{node.name}>")
    i = 0
    children = node.children
    for spec in model.children:
        count = 0
        while i < len(children) and children[i].name == spec.name:
            count += 1
            i += 1
        if spec.mult == "1" and count != 1:
            bad("content-model",
                f"expected exactly one <{spec.name}> inside <{node.name}>, found {count}")
        elif spec.mult == "?" and count > 1:
            bad("content-model",
                f"expected at most one <{spec.name}> inside <{node.name}>, found {count}")
        elif spec.mult == "+" and count == 0:
            bad("content-model",
                f"expected one or more <{spec.name}> inside <{node.name}>, found none")
    if i < len(children):
        bad("content-model",
            f"unexpected child <{children[i].name}> inside <{node.name}>")


def _check_attributes(node: XmlNode, path: str, schema: SchemaDecl,
                      report: list[Violation]) -> None:
    decls = schema.attributes.get(node.name, ())
    declared = {d.name for d in decls}
    for decl in decls:
        value = node.attributes.get(decl.name)
        if value is None:
            if decl.presence == "REQUIRED":
                report.append(
                    Violation(node.name, decl.name, "attribute-required",
                              f"missing required attribute {decl.name!r} on "
                              f"<{node.name}>", path)
                )
            elif decl.presence == "DEFAULT":
                node.attributes[decl.name] = decl.default or ""
            continue
        if decl.values is not None and value not in decl.values:
            allowed = "|".join(decl.values)
            report.append(
                Violation(node.name, decl.name, "attribute-enum",
                          f"attribute {decl.name!r} must be one of ({allowed}), "
                          f"got {value!r}", path)
            )
    for attr in node.attributes:
        if attr not in declared:
            report.append(
                Violation(node.name, attr, "attribute-declared",
                          f"attribute {attr!r} is not declared on <{node.name}>",
                          path)
            )


# ---------------------------------------------------------------------------
# Schema text grammar

_ATTR_LINE = re.compile(
    r"attribute\s+(?P<elem>\S+)\s+(?P<name>\S+)\s+"
    r"(?P<kind>CDATA|\([^)]*\))\s+"
    r"(?P<presence>REQUIRED|IMPLIED|DEFAULT)(?:\s+\"(?P<default>[^\"]*)\")?\s*$"
)


def parse_schema(text: str) -> SchemaDecl:
    root: Optional[str] = None
    elements: dict[str, ContentModel] = {}
    attributes: dict[str, list[AttrDecl]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head == "root":
            root = line.split()[1]
        elif head == "element":
            parts = line.split(None, 2)
            if len(parts) != 3:
                raise InvalidSchema(f"line {lineno}: malformed element declaration")
            name, body = parts[1], parts[2].strip()
            _require_name(name, lineno)
            if body == "EMPTY":
                elements[name] = ContentModel("EMPTY")
            elif body == "TEXT":
                elements[name] = ContentModel("TEXT")
            elif body.startswith("(") and body.endswith(")"):
                specs = []
                for token in body[1:-1].split(","):
                    token = token.strip()
                    if not token:
                        raise InvalidSchema(f"line {lineno}: empty child spec")
                    mult = "1"
                    if token[-1] in "?*+":
                        token, mult = token[:-1], token[-1]
                    _require_name(token, lineno)
                    specs.append(ChildSpec(token, mult))
                elements[name] = ContentModel("SEQUENCE", tuple(specs))
            else:
                raise InvalidSchema(f"line {lineno}: bad content model {body!r}")
        elif head == "attribute":
            m = _ATTR_LINE.match(line)
            if not m:
                raise InvalidSchema(f"line {lineno}: malformed attribute declaration")
            kind = m.group("kind")
            values = None
            if kind != "CDATA":
                values = tuple(v.strip() for v in kind[1:-1].split("|") if v.strip())
                if not values:
                    raise InvalidSchema(f"line {lineno}: empty enumeration")
            presence = m.group("presence")
            default = m.group("default")
            if presence == "DEFAULT" and default is None:
                raise InvalidSchema(f"line {lineno}: DEFAULT requires a quoted value")
            attributes.setdefault(m.group("elem"), []).append(
                AttrDecl(m.group("name"), values, presence, default)
            )
        else:
            raise InvalidSchema(f"line {lineno}: unknown declaration {head!r}")

    if root is None:
        raise InvalidSchema("schema declares no root")
    schema = SchemaDecl(
        root=root,
        elements=elements,
        attributes={k: tuple(v) for k, v in attributes.items()},
    )
    schema.validate_decl()
    return schema


def _require_name(name: str, lineno: int) -> None:
    m = NAME_RE.match(name)
    if not m or m.group(0) != name:
        raise InvalidSchema(f"line {lineno}: invalid name {name!r}")
