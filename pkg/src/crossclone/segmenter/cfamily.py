"""Statement-level front end for brace-delimited static languages.

Covers the subset of Java and TypeScript the pipeline needs: function and
method declarations with typed parameters, the statement taxonomy, class
field visibility (for object-return expansion), and top-level context
declarations for source replication. It is a tokenizer + brace matcher,
not a grammar-complete parser.
"""

from __future__ import annotations

from dataclasses import dataclass

from crossclone.errors import ParseError
from crossclone.model import (
    BOOL,
    CHAR,
    FILE,
    GENERIC,
    INT8,
    INT16,
    INT32,
    INT64,
    REAL32,
    REAL64,
    STRING,
    LanguageId,
    array_desc,
    object_desc,
)
from crossclone.segmenter.windows import FunctionUnit, StatementNode

_MULTI_OPS = (
    ">>>=", "===", "!==", "<<=", ">>=", ">>>", "**=", "...",
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "?.",
)

JAVA_TYPE_TOKENS = {
    "byte": INT8, "short": INT16, "int": INT32, "long": INT64,
    "float": REAL32, "double": REAL64, "char": CHAR, "boolean": BOOL,
    "Byte": INT8, "Short": INT16, "Integer": INT32, "Long": INT64,
    "Float": REAL32, "Double": REAL64, "Character": CHAR, "Boolean": BOOL,
    "String": STRING, "File": FILE, "Object": GENERIC,
}

# Desk corpora mark integer intent with a `type int = number` alias.
TS_TYPE_TOKENS = {
    "int": INT32, "number": REAL64, "string": STRING,
    "boolean": BOOL, "any": GENERIC,
}

JAVA_MODIFIERS = {
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "transient", "volatile", "strictfp",
}

_STMT_KEYWORDS = {"if", "for", "while", "do", "try", "switch"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | char | punct
    text: str
    start: int
    end: int


def tokenize(source: str, file: str = "<source>"):
    toks = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise ParseError(file, position=i, message="unterminated comment")
            i = j + 2
            continue
        if ch in "\"'`":
            quote = ch
            j = i + 1
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == quote:
                    break
                j += 1
            if j >= n:
                raise ParseError(file, position=i, message="unterminated string")
            kind = "char" if quote == "'" and j - i == 2 else "string"
            toks.append(Token(kind, source[i : j + 1], i, j + 1))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            if source.startswith(("0x", "0X"), i):
                j = i + 2
                while j < n and (source[j].isalnum()):
                    j += 1
            else:
                seen_dot = False
                while j < n and (
                    source[j].isdigit()
                    or (source[j] == "." and not seen_dot)
                    or source[j] in "eE"
                    or (source[j] in "+-" and source[j - 1] in "eE")
                ):
                    if source[j] == ".":
                        seen_dot = True
                    j += 1
                while j < n and source[j] in "lLfFdDn":
                    j += 1
            toks.append(Token("number", source[i:j], i, j))
            i = j
            continue
        if ch.isalpha() or ch in "_$":
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            toks.append(Token("ident", source[i:j], i, j))
            i = j
            continue
        for op in _MULTI_OPS:
            if source.startswith(op, i):
                toks.append(Token("punct", op, i, i + len(op)))
                i += len(op)
                break
        else:
            toks.append(Token("punct", ch, i, i + 1))
            i += 1
    return toks


def _match(toks, i, open_ch, close_ch):
    """Index just past the bracket pair opening at toks[i]."""
    depth = 0
    j = i
    while j < len(toks):
        t = toks[j].text
        if toks[j].kind == "punct":
            if t == open_ch:
                depth += 1
            elif t == close_ch:
                depth -= 1
                if depth == 0:
                    return j + 1
        j += 1
    raise ParseError("<tokens>", position=toks[i].start, message=f"unbalanced {open_ch}")


def _split_top_commas(toks):
    parts, depth, cur = [], 0, []
    for t in toks:
        if t.kind == "punct":
            if t.text in "([<{":
                depth += 1
            elif t.text in ")]>}":
                depth -= 1
            elif t.text == "," and depth == 0:
                parts.append(cur)
                cur = []
                continue
        cur.append(t)
    if cur:
        parts.append(cur)
    return parts


class _Front:
    def __init__(self, source: str, language: LanguageId, file: str):
        self.source = source
        self.language = language
        self.file = file
        self.toks = tokenize(source, file)
        self.classes = {}  # name -> list[(field, descriptor|None, private)]
        self.type_aliases = {}
        self.context_decls = {}  # name -> source text of a top-level decl
        self.imports = []
        self.units = []

    # --- types ---

    def type_desc(self, toks):
        toks = [t for t in toks if t.text not in ("final", "readonly")]
        if not toks:
            return None
        dims = 0
        while len(toks) >= 2 and toks[-2].text == "[" and toks[-1].text == "]":
            dims += 1
            toks = toks[:-2]
        if len(toks) != 1 or toks[0].kind != "ident":
            return None  # generics / qualified / exotic: unsupported
        base = toks[0].text
        table = JAVA_TYPE_TOKENS if self.language.name == "java" else TS_TYPE_TOKENS
        desc = table.get(base)
        if desc is None and base in self.type_aliases:
            desc = self.type_aliases[base]
        if desc is None and base in self.classes:
            desc = self.class_descriptor(base)
        if desc is None:
            return None
        for _ in range(dims):
            desc = array_desc(desc)
        return desc

    def class_descriptor(self, name):
        fields = self.classes.get(name)
        if not fields:
            return None
        public = [(f, d) for f, d, private in fields if not private and d is not None]
        if not public:
            return None
        return object_desc(public)

    # --- statements ---

    def parse_block_body(self, i):
        """toks[i] == '{'; returns (statements, index past '}')."""
        end = _match(self.toks, i, "{", "}")
        stmts, j = [], i + 1
        while j < end - 1:
            stmt, j = self.parse_statement(j, end - 1)
            if stmt is not None:
                stmts.append(stmt)
        return tuple(stmts), end

    def _stmt_or_block(self, i, limit):
        if self.toks[i].text == "{":
            return self.parse_block_body(i)
        stmt, j = self.parse_statement(i, limit)
        return ((stmt,) if stmt else ()), j

    def parse_statement(self, i, limit):
        toks = self.toks
        t = toks[i]
        start = t.start

        if t.text == ";":
            return None, i + 1

        if t.text == "if":
            j = _match(toks, i + 1, "(", ")")
            then_block, j = self._stmt_or_block(j, limit)
            blocks = [then_block]
            while j < limit and toks[j].text == "else":
                if toks[j + 1].text == "if":
                    nested, j2 = self.parse_statement(j + 1, limit)
                    blocks.append((nested,))
                    j = j2
                else:
                    else_block, j = self._stmt_or_block(j + 1, limit)
                    blocks.append(else_block)
                break
            end = toks[j - 1].end
            return StatementNode("conditional", (start, end), tuple(blocks)), j

        if t.text in ("for", "while"):
            j = _match(toks, i + 1, "(", ")")
            body, j = self._stmt_or_block(j, limit)
            return StatementNode("loop", (start, toks[j - 1].end), (body,)), j

        if t.text == "do":
            body, j = self._stmt_or_block(i + 1, limit)
            j = _match(toks, j + 1, "(", ")")  # while (...)
            if j < limit and toks[j].text == ";":
                j += 1
            return StatementNode("loop", (start, toks[j - 1].end), (body,)), j

        if t.text == "try":
            body, j = self.parse_block_body(i + 1)
            blocks = [body]
            while j < limit and toks[j].text in ("catch", "finally"):
                k = j + 1
                if toks[k].text == "(":
                    k = _match(toks, k, "(", ")")
                handler, j = self.parse_block_body(k)
                blocks.append(handler)
            return StatementNode("try", (start, toks[j - 1].end), tuple(blocks)), j

        if t.text == "switch":
            j = _match(toks, i + 1, "(", ")")
            end = _match(toks, j, "{", "}")
            stmts, k = [], j + 1
            while k < end - 1:
                if toks[k].text in ("case", "default"):
                    while toks[k].text != ":":
                        k += 1
                    k += 1
                    continue
                stmt, k = self.parse_statement(k, end - 1)
                if stmt is not None:
                    stmts.append(stmt)
            return (
                StatementNode("conditional", (start, toks[end - 1].end), (tuple(stmts),)),
                end,
            )

        if t.text == "{":
            body, j = self.parse_block_body(i)
            return StatementNode("block", (start, toks[j - 1].end), (body,)), j

        # Simple statement: consume to the terminating ';' at depth 0.
        j, depth = i, 0
        while j < limit:
            txt = toks[j].text
            if toks[j].kind == "punct":
                if txt in "({[":
                    depth += 1
                elif txt in ")}]":
                    depth -= 1
                elif txt == ";" and depth == 0:
                    j += 1
                    break
            j += 1
        body = toks[i:j]
        kind = self._classify_simple(body)
        return StatementNode(kind, (start, toks[j - 1].end), ()), j

    def _classify_simple(self, body):
        words = [t.text for t in body]
        if not words:
            return "other"
        head = words[0]
        if head in ("return", "throw", "break", "continue", "import", "package", "export"):
            return "other"
        if head in ("let", "const", "var"):
            return "declaration"
        stripped = [w for w in words if w not in JAVA_MODIFIERS]
        if stripped and stripped[0] in JAVA_TYPE_TOKENS and self.language.name == "java":
            return "declaration"
        # `Type name ...` / `Type[] name ...` declaration shapes
        if (
            len(body) >= 2
            and body[0].kind == "ident"
            and (
                body[1].kind == "ident"
                or (len(body) >= 4 and body[1].text == "[" and body[2].text == "]")
            )
            and self.language.name == "java"
        ):
            return "declaration"
        depth = 0
        for idx, t in enumerate(body):
            if t.kind != "punct":
                continue
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                depth -= 1
            elif depth == 0 and t.text in (
                "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", "++", "--",
            ):
                return "assignment"
        return "other"

    # --- declarations ---

    def parse_params(self, toks):
        params = []
        for part in _split_top_commas(toks):
            part = [t for t in part if t.text not in ("final",)]
            if not part:
                continue
            if self.language.name == "java":
                name = part[-1].text
                desc = self.type_desc(part[:-1])
            else:
                colon = next(
                    (k for k, t in enumerate(part) if t.text == ":"), None
                )
                if colon is None:
                    name, desc = part[0].text, None
                else:
                    name = part[0].text
                    desc = self.type_desc(part[colon + 1 :])
            params.append((name, desc))
        return tuple(params)

    def _has_value_return(self, body_toks):
        for k, t in enumerate(body_toks):
            if t.text == "return" and k + 1 < len(body_toks) and body_toks[k + 1].text != ";":
                return True
        return False

    def _add_unit(self, qual, params, ret_desc, body_open, prefix_start, ret_token=""):
        body, end = self.parse_block_body(body_open)
        body_toks = self.toks[body_open + 1 : end - 1]
        self.units.append(
            FunctionUnit(
                name=qual,
                language=self.language,
                file=self.file,
                source=self.source,
                body=body,
                span=(prefix_start, self.toks[end - 1].end),
                params=params,
                return_type=ret_desc,
                has_return=self._has_value_return(body_toks),
                return_type_token=ret_token,
            )
        )
        return end

    def parse_java_class(self, i, class_name):
        """toks[i] == '{' of the class body."""
        end = _match(self.toks, i, "{", "}")
        fields = self.classes.setdefault(class_name, [])
        j = i + 1
        while j < end - 1:
            start = j
            mods = set()
            while self.toks[j].text in JAVA_MODIFIERS:
                mods.add(self.toks[j].text)
                j += 1
            if self.toks[j].text == "class":
                inner = self.toks[j + 1].text
                k = j + 2
                while self.toks[k].text != "{":
                    k += 1
                j = self.parse_java_class(k, f"{class_name}.{inner}")
                continue
            if self.toks[j].text in ("{",):  # static/instance initializer
                j = _match(self.toks, j, "{", "}")
                continue
            # scan the member head up to '(' (method) or '=' / ';' (field)
            k = j
            while k < end and self.toks[k].text not in ("(", "=", ";"):
                k += 1
            if k >= end:
                break
            if self.toks[k].text == "(":
                name_tok = self.toks[k - 1]
                type_toks = self.toks[j : k - 1]
                close = _match(self.toks, k, "(", ")")
                params = self.parse_params(self.toks[k + 1 : close - 1])
                m = close
                while m < end and self.toks[m].text not in ("{", ";"):
                    m += 1  # skip `throws ...`
                if self.toks[m].text == ";":
                    j = m + 1  # abstract/interface method
                    continue
                ret_desc = self.type_desc(type_toks) if type_toks else None
                qual = f"{class_name}.{name_tok.text}"
                if name_tok.text == class_name.split(".")[-1]:
                    qual = f"{class_name}.<init>"  # constructor
                ret_token = type_toks[0].text if len(type_toks) == 1 else ""
                j = self._add_unit(
                    qual, params, ret_desc, m, self.toks[start].start, ret_token
                )
            else:
                # field declaration: Type name [= init] (, more)? ;
                name_tok = self.toks[k - 1]
                desc = self.type_desc(self.toks[j : k - 1])
                fields.append((name_tok.text, desc, "private" in mods))
                while self.toks[j].text != ";":
                    j += 1
                j += 1
        return end

    def parse(self):
        toks = self.toks
        j = 0
        while j < len(toks):
            t = toks[j]
            if t.text == "import" or (self.language.name == "java" and t.text == "package"):
                k = j
                while k < len(toks) and toks[k].text != ";":
                    k += 1
                self.imports.append(self.source[t.start : toks[k].end])
                j = k + 1
                continue
            if t.text == "type" and self.language.name == "typescript":
                # `type Name = ...;` alias; record both descriptor and text
                name = toks[j + 1].text
                k = j
                while k < len(toks) and toks[k].text != ";":
                    k += 1
                rhs = toks[j + 3 : k]
                self.type_aliases[name] = self.type_desc(rhs)
                self.context_decls[name] = self.source[t.start : toks[k].end]
                j = k + 1
                continue
            if t.text == "class":
                name = toks[j + 1].text
                k = j + 2
                while toks[k].text != "{":
                    k += 1
                class_start = t.start
                end = (
                    self.parse_java_class(k, name)
                    if self.language.name == "java"
                    else _match(toks, k, "{", "}")
                )
                self.context_decls[name] = self.source[class_start : toks[end - 1].end]
                j = end
                continue
            if t.text == "function" or (
                t.text == "export" and j + 1 < len(toks) and toks[j + 1].text == "function"
            ):
                start = j
                j = j + 1 if t.text == "export" else j
                name = toks[j + 1].text
                open_paren = j + 2
                close = _match(toks, open_paren, "(", ")")
                params = self.parse_params(toks[open_paren + 1 : close - 1])
                m = close
                ret_desc = None
                ret_token = ""
                if toks[m].text == ":":
                    k = m + 1
                    while toks[k].text != "{":
                        k += 1
                    ret_desc = self.type_desc(toks[m + 1 : k])
                    if k - (m + 1) == 1:
                        ret_token = toks[m + 1].text
                    m = k
                j = self._add_unit(name, params, ret_desc, m, toks[start].start, ret_token)
                self.context_decls[name] = self.source[
                    toks[start].start : self.toks[j - 1].end
                ]
                continue
            if t.text in ("const", "let", "var") and self.language.name == "typescript":
                k = j
                while k < len(toks) and toks[k].text != ";":
                    k += 1
                if j + 1 < len(toks):
                    self.context_decls[toks[j + 1].text] = self.source[
                        t.start : toks[min(k, len(toks) - 1)].end
                    ]
                j = k + 1
                continue
            j += 1
        return self.units


def parse_functions(source_text: str, language: LanguageId, file: str = "<source>"):
    import dataclasses

    front = _Front(source_text, language, file)
    units = [dataclasses.replace(u, context=front) for u in front.parse()]
    return units, front
