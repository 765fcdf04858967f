"""A tiny DOM built on :mod:`html.parser`; enough for tables and page generation."""
from __future__ import annotations

from html.parser import HTMLParser
from typing import Dict, Iterator, List, Optional, Union

VOID = {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr"}
# opening one of the keys implicitly closes an open element of the listed tags
_IMPLIED_END = {
    "p": {"p"},
    "li": {"li"},
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "thead": {"tbody", "tr", "td", "th"},
    "tbody": {"thead", "tbody", "tr", "td", "th"},
    "tfoot": {"thead", "tbody", "tr", "td", "th"},
}
_SCOPE_STOP = {"table", "ul", "ol", "div", "section", "article", "body", "html", "td", "th"}


class HtmlError(ValueError):
    pass


class Element:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: Optional[Dict[str, str]] = None, parent: "Element" = None):
        self.tag = tag
        self.attrs = attrs or {}
        self.children: List[Union["Element", str]] = []
        self.parent = parent

    def __repr__(self):
        return f"<{self.tag} {len(self.children)} children>"

    @property
    def classes(self) -> List[str]:
        return self.attrs.get("class", "").split()

    def iter(self, tag: Optional[str] = None) -> Iterator["Element"]:
        """Depth-first over descendants (self included)."""
        if tag is None or self.tag == tag:
            yield self
        for c in self.children:
            if isinstance(c, Element):
                yield from c.iter(tag)

    def find(self, tag: str) -> Optional["Element"]:
        return next(self.iter(tag), None)

    def text(self) -> str:
        parts: List[str] = []
        self._collect(parts)
        return "".join(parts)

    def _collect(self, parts):
        for c in self.children:
            if isinstance(c, str):
                parts.append(c)
            elif c.tag == "br":
                parts.append("\n")
            elif c.tag not in ("script", "style"):
                c._collect(parts)
                if c.tag in ("td", "th", "p", "div", "li", "tr"):
                    parts.append(" ")

    def ancestors(self) -> Iterator["Element"]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = Element("#document")
        self.stack = [self.root]

    def _close_implied(self, tag):
        closes = _IMPLIED_END.get(tag)
        if not closes:
            return
        for i in range(len(self.stack) - 1, 0, -1):
            t = self.stack[i].tag
            if t in closes:
                del self.stack[i:]
                return
            if t in _SCOPE_STOP:
                return

    def handle_starttag(self, tag, attrs):
        self._close_implied(tag)
        el = Element(tag, {k: (v or "") for k, v in attrs}, self.stack[-1])
        self.stack[-1].children.append(el)
        if tag not in VOID:
            self.stack.append(el)

    def handle_startendtag(self, tag, attrs):
        el = Element(tag, {k: (v or "") for k, v in attrs}, self.stack[-1])
        self.stack[-1].children.append(el)

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if data:
            self.stack[-1].children.append(data)


def parse_html(html: str) -> Element:
    """Parse ``html`` into an Element tree rooted at a ``#document`` node."""
    if not isinstance(html, str):
        raise HtmlError("html must be text")
    builder = _TreeBuilder()
    try:
        builder.feed(html)
        builder.close()
    except Exception as exc:  # html.parser is lenient; anything raised is fatal
        raise HtmlError(f"unparseable HTML: {exc}") from exc
    return builder.root
