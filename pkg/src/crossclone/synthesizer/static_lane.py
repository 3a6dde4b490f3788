"""Static lane of the synthesizer: token-level dataflow over C-family
snippets, declared-type resolution, and source emission for TypeScript and
Java. Static corpora are assumed ASCII (token offsets double as byte
offsets)."""

from __future__ import annotations

from crossclone.model import GENERIC, TypeDescriptor
from crossclone.segmenter.cfamily import JAVA_TYPE_TOKENS, TS_TYPE_TOKENS, tokenize
from crossclone.segmenter.windows import Snippet

KEYWORDS = {
    "if", "else", "for", "while", "do", "switch", "case", "default", "break",
    "continue", "return", "try", "catch", "finally", "throw", "throws", "new",
    "instanceof", "typeof", "in", "of", "null", "true", "false", "undefined",
    "let", "const", "var", "function", "class", "this", "super", "void",
    "import", "export", "package", "static", "public", "private", "protected",
    "final", "abstract", "extends", "implements",
}

BUILTIN_NAMES = {
    "Math", "console", "System", "JSON", "Number", "BigInt", "Array", "Object",
    "Integer", "Long", "Double", "Float", "Boolean", "Character", "Byte",
    "Short", "String", "StringBuilder", "Arrays", "Collections", "parseInt",
    "parseFloat", "isNaN", "NaN", "Infinity",
}

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}


def _type_words(snippet: Snippet):
    front = snippet.unit.context
    if snippet.language.name == "java":
        words = set(JAVA_TYPE_TOKENS)
    else:
        words = set(TS_TYPE_TOKENS)
    if front is not None:
        words |= set(front.type_aliases) | set(front.classes)
    return words


class StaticFlow:
    def __init__(self, snippet: Snippet):
        self.snippet = snippet
        self.front = snippet.unit.context
        self.lang = snippet.language.name
        self.type_words = _type_words(snippet)
        self.toks = tokenize(snippet.text)
        self.bound = set()
        self.loop_header = set()
        self.decl_types = {}
        self.modified_order = []
        self.modified = set()
        self.used_order = []
        self.used = set()
        self.last_def_const = {}
        self.context_refs = set()
        self._scan()

    # -- token helpers --

    def _use(self, name):
        if name in self.used:
            return
        self.used.add(name)
        self.used_order.append(name)

    def _modify(self, name, const):
        if name not in self.modified:
            self.modified.add(name)
            self.modified_order.append(name)
        self.last_def_const[name] = const

    def _is_name(self, tok, prev):
        if tok.kind != "ident":
            return False
        if tok.text in KEYWORDS or tok.text in self.type_words:
            return False
        if tok.text in BUILTIN_NAMES:
            return False
        if prev is not None and prev.text == ".":
            return False  # member access
        return True

    def _literal_rhs(self, toks):
        toks = [t for t in toks if t.text != ";"]
        if len(toks) == 1 and toks[0].kind in ("number", "string", "char"):
            return True
        if (
            len(toks) == 2
            and toks[0].text in ("-", "+")
            and toks[1].kind == "number"
        ):
            return True
        return toks and all(t.text in ("true", "false") for t in toks)

    # -- scanning --

    def _loop_spans(self):
        spans = []

        def walk(stmts):
            for s in stmts:
                if s.kind == "loop":
                    spans.append(s.span)
                for block in s.blocks:
                    walk(block)

        walk(self.snippet.statements)
        return spans

    def _in_loop(self, tok) -> bool:
        pos = self.snippet.span[0] + tok.start
        return any(lo <= pos < hi for lo, hi in self._loops)

    def _scan(self):
        self._loops = self._loop_spans()
        toks = self.toks
        n = len(toks)
        i = 0
        while i < n:
            t = toks[i]
            prev = toks[i - 1] if i > 0 else None
            nxt = toks[i + 1] if i + 1 < n else None
            if t.kind != "ident":
                i += 1
                continue
            w = t.text

            # declarations: `let|const|var NAME [: T]` or `Type NAME`
            if w in ("let", "const", "var") and self.lang == "typescript":
                i = self._declaration(i + 1, header=self._is_for_header(i))
                continue
            if (
                w in self.type_words
                and nxt is not None
                and (prev is None or prev.text not in (".", "new"))
            ):
                # `Type name` / `Type[] name` declaration shapes
                j = i + 1
                while j + 1 < n and toks[j].text == "[" and toks[j + 1].text == "]":
                    j += 2
                if j < n and self._is_name(toks[j], toks[j - 1]):
                    i = self._declaration(i, header=self._is_for_header(i), typed=True)
                    continue
                i += 1
                continue

            if not self._is_name(t, prev):
                i += 1
                continue

            # call / class reference
            if nxt is not None and nxt.text == "(":
                self.context_refs.add(w)
                i += 1
                continue
            if prev is not None and prev.text == "new":
                self.context_refs.add(w)
                i += 1
                continue

            # assignment / increment targets
            if nxt is not None and nxt.text in ASSIGN_OPS:
                rhs_const = False
                if nxt.text == "=":
                    k = i + 2
                    rhs = []
                    while k < n and toks[k].text != ";":
                        rhs.append(toks[k])
                        k += 1
                    rhs_const = self._literal_rhs(rhs)
                else:
                    self._use(w)  # compound assignment reads the old value
                self._modify(w, rhs_const and not self._in_loop(t))
                i += 2
                continue
            if (nxt is not None and nxt.text in ("++", "--")) or (
                prev is not None and prev.text in ("++", "--")
            ):
                self._use(w)
                self._modify(w, False)
                i += 1
                continue
            if nxt is not None and nxt.text == "[":
                # peek past the index for an assignment: base is modified
                close = self._match_sq(i + 1)
                if close is not None and close < n and toks[close].text in ASSIGN_OPS:
                    self._use(w)
                    self._modify(w, False)
                    i += 1
                    continue

            self._use(w)
            i += 1

    def _match_sq(self, i):
        depth = 0
        for j in range(i, len(self.toks)):
            if self.toks[j].text == "[":
                depth += 1
            elif self.toks[j].text == "]":
                depth -= 1
                if depth == 0:
                    return j + 1
        return None

    def _is_for_header(self, i):
        # inside `for (...)`: an unmatched '(' whose opener follows `for`
        depth = 0
        for j in range(i - 1, -1, -1):
            t = self.toks[j].text
            if t == ")":
                depth += 1
            elif t == "(":
                if depth == 0:
                    return j > 0 and self.toks[j - 1].text == "for"
                depth -= 1
            elif t == ";" and depth == 0:
                continue
        return False

    def _declaration(self, i, header=False, typed=False):
        """Parse one declaration starting at the type (typed) or name;
        returns the index to continue scanning from (just past the name)."""
        toks = self.toks
        n = len(toks)
        type_toks = []
        if typed:
            j = i
            while j < n and (
                toks[j].text in self.type_words
                or toks[j].text in ("[", "]")
            ):
                type_toks.append(toks[j])
                j += 1
            i = j
        if i >= n or toks[i].kind != "ident":
            return i + 1
        name = toks[i].text
        desc = None
        j = i + 1
        if j < n and toks[j].text == ":" and self.lang == "typescript":
            k = j + 1
            ann = []
            while k < n and toks[k].text not in ("=", ";", ",", ")"):
                ann.append(toks[k])
                k += 1
            desc = self._resolve_type_tokens(ann)
            j = k
        elif type_toks:
            desc = self._resolve_type_tokens(type_toks)
        const = False
        if j < n and toks[j].text == "=":
            k = j + 1
            rhs = []
            while k < n and toks[k].text not in (";", ","):
                rhs.append(toks[k])
                k += 1
            const = self._literal_rhs(rhs)
        self.bound.add(name)
        if header:
            self.loop_header.add(name)
        if desc is not None:
            self.decl_types[name] = desc
        self._modify(name, const and not self._in_loop(toks[i]))
        return i + 1

    def _resolve_type_tokens(self, toks):
        if self.front is not None:
            return self.front.type_desc(list(toks))
        texts = [t.text for t in toks]
        dims = 0
        while texts[-2:] == ["[", "]"]:
            dims += 1
            texts = texts[:-2]
        table = JAVA_TYPE_TOKENS if self.lang == "java" else TS_TYPE_TOKENS
        desc = table.get(texts[0]) if len(texts) == 1 else None
        if desc is None:
            return None
        from crossclone.model import array_desc

        for _ in range(dims):
            desc = array_desc(desc)
        return desc

    # -- results --

    def args(self):
        return tuple(n for n in self.used_order if n not in self.bound)

    def returns(self):
        return tuple(
            n
            for n in self.modified_order
            if not self.last_def_const.get(n, False)
            and not (n in self.loop_header)
        )

    def resolve_type(self, name):
        """Declared type of a variable: snippet declarations, then the
        enclosing function's params, then declarations earlier in its body."""
        if name in self.decl_types:
            return self.decl_types[name]
        for pname, desc in self.snippet.unit.params:
            if pname == name and desc is not None:
                return desc
        unit_flow = _unit_declarations(self.snippet.unit)
        if name in unit_flow:
            return unit_flow[name]
        return GENERIC


_UNIT_DECL_CACHE = {}


def _unit_declarations(unit):
    key = (unit.file, unit.span)
    if key not in _UNIT_DECL_CACHE:
        body_span = (unit.body[0].span[0], unit.body[-1].span[1]) if unit.body else unit.span
        from crossclone.segmenter.windows import Snippet as _S

        pseudo = _S(
            parent_function=unit.name,
            statements=unit.body,
            language=unit.language,
            span=body_span,
            depth=0,
            unit=unit,
        )
        _UNIT_DECL_CACHE[key] = StaticFlow(pseudo).decl_types if unit.body else {}
    return _UNIT_DECL_CACHE[key]


# --- emission ---------------------------------------------------------------


def ts_type_str(desc: TypeDescriptor, front) -> str:
    if desc is None:
        return "any"
    kind = desc.kind
    if kind == "int":
        return "int" if front is not None and "int" in front.type_aliases else "number"
    if kind == "real":
        return "number"
    if kind == "string":
        return "string"
    if kind == "bool":
        return "boolean"
    if kind == "char":
        return "string"
    if kind == "array":
        return ts_type_str(desc.element, front) + "[]"
    return "any"


def java_type_str(desc: TypeDescriptor) -> str:
    if desc is None:
        return "Object"
    kind = desc.kind
    if kind == "int":
        return {8: "byte", 16: "short", 32: "int", 64: "long"}[desc.bit_width]
    if kind == "real":
        return {32: "float", 64: "double"}[desc.bit_width]
    if kind == "string":
        return "String"
    if kind == "bool":
        return "boolean"
    if kind == "char":
        return "char"
    if kind == "file":
        return "File"
    if kind == "array":
        return java_type_str(desc.element) + "[]"
    return "Object"


def _context_block(front, needed, language) -> str:
    if front is None:
        return ""
    parts = list(front.imports)
    # type aliases are tiny and harmless: always replicated
    alias_texts = [front.context_decls[n] for n in front.type_aliases if n in front.context_decls]
    include = set()
    frontier = [n for n in needed if n in front.context_decls and n not in front.type_aliases]
    while frontier:
        name = frontier.pop()
        if name in include:
            continue
        include.add(name)
        text = front.context_decls[name]
        for tok in tokenize(text):
            if (
                tok.kind == "ident"
                and tok.text in front.context_decls
                and tok.text not in include
                and tok.text != name
            ):
                frontier.append(tok.text)
    ordered = [n for n in front.context_decls if n in include]
    parts += alias_texts + [front.context_decls[n] for n in ordered]
    return ("\n".join(parts) + "\n\n") if parts else ""


def emit_source(snippet: Snippet, fid, arg_names, arg_descs, ret_desc, return_var,
                context_names, predeclare=()):
    front = snippet.unit.context
    lang = snippet.language.name
    body = snippet.text
    ctx = _context_block(front, context_names, lang)
    if lang == "typescript":
        params = ", ".join(
            f"{n}: {ts_type_str(d, front)}" for n, d in zip(arg_names, arg_descs)
        )
        lines = [f"export function {fid}({params}): {ts_type_str(ret_desc, front)} {{"]
        for name in predeclare:
            lines.append(f"    let {name}: any;")
        for line in body.splitlines():
            lines.append("    " + line if line.strip() else "")
        if return_var is not None:
            lines.append(f"    return {return_var};")
        lines.append("}")
        return ctx + "\n".join(lines) + "\n"
    # java: best-effort emission (no executor in this environment)
    params = ", ".join(
        f"{java_type_str(d)} {n}" for n, d in zip(arg_names, arg_descs)
    )
    lines = [
        f"public class C_{fid} {{",
        f"    public static {java_type_str(ret_desc)} {fid}({params}) {{",
    ]
    for name in predeclare:
        lines.append(f"        Object {name};")
    for line in body.splitlines():
        lines.append("        " + line if line.strip() else "")
    if return_var is not None:
        lines.append(f"        return {return_var};")
    lines.append("    }")
    lines.append("}")
    return ctx + "\n".join(lines) + "\n"


def emit_member_projection(base_fn, fid, member_path, member_desc, front):
    args = ", ".join(base_fn.arg_names)
    access = "".join(f".{m}" for m in member_path)
    if base_fn.language == "typescript":
        params = ", ".join(
            f"{n}: {ts_type_str(d, front)}"
            for n, d in zip(base_fn.arg_names, base_fn.signature.args)
        )
        ret = ts_type_str(member_desc, front)
        return (
            base_fn.source_text
            + f"\nexport function {fid}({params}): {ret} {{\n"
            + f"    return {base_fn.entry}({args}){access};\n}}\n"
        )
    params = ", ".join(
        f"{java_type_str(d)} {n}"
        for n, d in zip(base_fn.arg_names, base_fn.signature.args)
    )
    return (
        base_fn.source_text
        + f"\npublic class C_{fid} {{\n"
        + f"    public static {java_type_str(member_desc)} {fid}({params}) {{\n"
        + f"        return C_{base_fn.entry}.{base_fn.entry}({args}){access};\n    }}\n}}\n"
    )
