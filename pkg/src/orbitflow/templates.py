"""Path expressions and text templates for report styling.

Paths walk element names from the root (``/work-order/routing/step``) and may
end in an attribute (``.../step@status``).  Templates are plain text with
``{path}`` placeholders and ``{for path}...{end}`` repetition blocks; inside a
block, paths written without a leading slash resolve against the repeated
node.  The intent is the classic stylesheet split: keep the document as data
and the look of a report in a template file that can change without touching
software.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .xmlcore import NAME_RE, XmlNode


class TemplateParseError(Exception):
    pass


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class TemplatePath:
    steps: tuple[str, ...]
    attribute: Optional[str] = None
    absolute: bool = True

    def __str__(self) -> str:
        text = ("/" if self.absolute else "") + "/".join(self.steps)
        return f"{text}@{self.attribute}" if self.attribute else text


def parse_path(text: str) -> TemplatePath:
    raw = text.strip()
    absolute = raw.startswith("/")
    if absolute:
        raw = raw[1:]
    attribute = None
    if "@" in raw:
        raw, _, attribute = raw.rpartition("@")
        if not _is_name(attribute):
            raise PathError(f"bad attribute name in path {text!r}")
    steps = raw.split("/") if raw else []
    if not steps or not all(_is_name(s) for s in steps):
        raise PathError(f"bad path {text!r}")
    return TemplatePath(steps=tuple(steps), attribute=attribute, absolute=absolute)


def _is_name(s: str) -> bool:
    m = NAME_RE.match(s)
    return bool(m) and m.group(0) == s


def _select(start: XmlNode, steps: tuple[str, ...]) -> list[XmlNode]:
    """Nodes reached by matching ``steps`` with ``start`` as the first step."""
    if not steps or start.name != steps[0]:
        return []
    nodes = [start]
    for step in steps[1:]:
        nodes = [child for node in nodes for child in node.children
                 if child.name == step]
    return nodes


def select_nodes(path: TemplatePath, root: XmlNode,
                 context: Optional[XmlNode] = None) -> list[XmlNode]:
    """Document-order nodes matched by ``path``.

    Absolute paths anchor at the document root; relative paths anchor at the
    context node (defaulting to the root).
    """
    start = root if path.absolute or context is None else context
    return _select(start, path.steps)


def eval_path(doc: XmlNode, path: Union[TemplatePath, str],
              context: Optional[XmlNode] = None) -> list[str]:
    """String values matched by ``path``: attribute values for an attribute
    terminal, otherwise each matched element's text content.  An absent path
    yields an empty list."""
    if isinstance(path, str):
        path = parse_path(path)
    nodes = select_nodes(path, doc, context)
    if path.attribute is None:
        return [node.text for node in nodes]
    attr = path.attribute
    return [node.attributes[attr] for node in nodes if attr in node.attributes]


# ---------------------------------------------------------------------------
# Templates

_TAG_RE = re.compile(r"\{([^{}]*)\}")


@dataclass(frozen=True)
class _Placeholder:
    path: TemplatePath


@dataclass(frozen=True)
class _Block:
    path: TemplatePath
    parts: tuple


_Part = Union[str, _Placeholder, _Block]


@dataclass(frozen=True)
class ReportTemplate:
    """Compiled template; build one with :func:`compile_template`."""

    body: str
    parts: tuple


def compile_template(body: str) -> ReportTemplate:
    parts, pos = _parse_parts(body, 0, top_level=True)
    return ReportTemplate(body=body, parts=tuple(parts))


def _parse_parts(body: str, pos: int, *, top_level: bool):
    parts: list[_Part] = []
    while True:
        brace = body.find("{", pos)
        if brace < 0:
            if not top_level:
                raise TemplateParseError("unclosed {for ...} block")
            if pos < len(body):
                parts.append(body[pos:])
            return parts, len(body)
        if brace > pos:
            parts.append(body[pos:brace])
        m = _TAG_RE.match(body, brace)
        if not m:
            raise TemplateParseError(f"unterminated '{{' at offset {brace}")
        tag = m.group(1).strip()
        pos = m.end()
        if tag == "end":
            if top_level:
                raise TemplateParseError("{end} without matching {for}")
            return parts, pos
        if tag.startswith("for ") or tag == "for":
            path_text = tag[3:].strip()
            try:
                path = parse_path(path_text)
            except PathError as exc:
                raise TemplateParseError(str(exc)) from None
            if path.attribute is not None:
                raise TemplateParseError(
                    f"{{for}} requires an element path, got {path_text!r}"
                )
            inner, pos = _parse_parts(body, pos, top_level=False)
            parts.append(_Block(path=path, parts=tuple(inner)))
            continue
        try:
            parts.append(_Placeholder(parse_path(tag)))
        except PathError as exc:
            raise TemplateParseError(str(exc)) from None


def apply_template(doc: XmlNode, template: Union[ReportTemplate, str]) -> str:
    """Render ``template`` against ``doc``.

    Placeholders take the first value of their path (empty string when the
    path matches nothing); ``{for}`` blocks repeat per matched node with that
    node as the relative context.
    """
    if isinstance(template, str):
        template = compile_template(template)
    out: list[str] = []
    _render(template.parts, doc, doc, out)
    return "".join(out)


def _render(parts, root: XmlNode, context: XmlNode, out: list[str]) -> None:
    for part in parts:
        if isinstance(part, str):
            out.append(part)
        elif isinstance(part, _Placeholder):
            values = eval_path(root, part.path, context=context)
            out.append(values[0] if values else "")
        else:
            for node in select_nodes(part.path, root, context=context):
                _render(part.parts, root, node, out)
