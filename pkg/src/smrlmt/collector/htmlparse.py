"""Anchor, form and resource extraction from static HTML."""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Optional

_VOID = {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr"}


@dataclass
class Field:
    name: str
    type: str
    value: str = ""
    checked: bool = False


@dataclass
class Link:
    href: str
    locator: str
    text: str = ""


@dataclass
class Form:
    action: Optional[str]
    method: Optional[str]
    locator: str
    name: str = ""
    id: str = ""
    fields: list[Field] = field(default_factory=list)

    @property
    def has_password(self) -> bool:
        return any(f.type == "password" for f in self.fields)

    @property
    def has_text(self) -> bool:
        return any(f.type in ("text", "email") for f in self.fields)


@dataclass
class Document:
    links: list[Link] = field(default_factory=list)
    forms: list[Form] = field(default_factory=list)
    resources: list[str] = field(default_factory=list)
    base: Optional[str] = None


class _Extractor(HTMLParser):
    """Collects elements and gives each an XPath-like locator such as ``/html[1]/body[1]/a[2]``."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.doc = Document()
        self.stack: list[tuple[str, int]] = []
        self.counts: list[dict[str, int]] = [{}]
        self.form: Optional[Form] = None
        self.link: Optional[Link] = None
        self.select: Optional[Field] = None
        self.textarea: Optional[Field] = None

    def _push(self, tag: str) -> str:
        n = self.counts[-1].get(tag, 0) + 1
        self.counts[-1][tag] = n
        loc = "/" + "/".join(f"{t}[{i}]" for t, i in self.stack + [(tag, n)])
        if tag not in _VOID:
            self.stack.append((tag, n))
            self.counts.append({})
        return loc

    def _pop(self, tag: str) -> None:
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i][0] == tag:
                del self.stack[i:]
                del self.counts[i + 1 :]
                return

    def handle_starttag(self, tag, attrs):
        a = {k: (v or "") for k, v in attrs}
        loc = self._push(tag)
        if tag == "base" and a.get("href") and self.doc.base is None:
            self.doc.base = a["href"]
        elif tag == "a" and "href" in a:
            self.link = Link(a["href"], loc)
            self.doc.links.append(self.link)
        elif tag == "form":
            self.form = Form(a.get("action"), a.get("method"), loc, a.get("name", ""), a.get("id", ""))
            self.doc.forms.append(self.form)
        elif tag == "input" and self.form is not None and a.get("name"):
            ftype = a.get("type", "text").lower() or "text"
            self.form.fields.append(Field(a["name"], ftype, a.get("value", ""), "checked" in a))
        elif tag == "textarea" and self.form is not None and a.get("name"):
            self.textarea = Field(a["name"], "textarea")
            self.form.fields.append(self.textarea)
        elif tag == "select" and self.form is not None and a.get("name"):
            self.select = Field(a["name"], "select")
            self.form.fields.append(self.select)
        elif tag == "option" and self.select is not None:
            if not self.select.checked:
                self.select.value = a.get("value", "")
                self.select.checked = "selected" in a
        elif tag == "button" and self.form is not None and a.get("name"):
            self.form.fields.append(Field(a["name"], "submit", a.get("value", "")))
        elif tag in ("img", "script") and a.get("src"):
            self.doc.resources.append(a["src"])
        elif tag == "link" and a.get("href"):
            self.doc.resources.append(a["href"])

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in _VOID:
            self._pop(tag)

    def handle_endtag(self, tag):
        if tag == "form":
            self.form = None
        elif tag == "a":
            self.link = None
        elif tag == "select":
            self.select = None
        elif tag == "textarea":
            self.textarea = None
        self._pop(tag)

    def handle_data(self, data):
        if self.link is not None:
            self.link.text += data
        if self.textarea is not None:
            self.textarea.value += data


def parse_html(text: str) -> Document:
    p = _Extractor()
    p.feed(text)
    p.close()
    for link in p.doc.links:
        link.text = " ".join(link.text.split())
    return p.doc
