"""Lexicalized dependency grammar: word classes, features, valency frames.

The grammar is fully declarative and lives in a line-oriented lexicon file
with four mandatory sections (``classes:``, ``features:``, ``barriers:``,
``entries:``) plus an optional ``virtual:`` section declaring class-level
frames for predicted placeholder words.  See ``serialize`` for the exact
shape of every line; the loader and the serializer are kept round-trip
compatible and the test suite holds them to that.

A loaded Lexicon is immutable and may be shared freely between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class LexiconError(Exception):
    """Base class for lexicon loading/usage failures."""


class LexiconParseError(LexiconError):
    def __init__(self, line_no: int, column: int, message: str) -> None:
        super().__init__(f"line {line_no}, col {column}: {message}")
        self.line_no = line_no
        self.column = column


class LexiconSemanticError(LexiconError):
    def __init__(self, line_no: int, identifier: str, message: str) -> None:
        super().__init__(f"line {line_no}: {message} ({identifier!r})")
        self.line_no = line_no
        self.identifier = identifier


class UnknownIdentifierError(LexiconError):
    """A class/feature name passed to an API call is not declared."""


NO_ROLE = "none"
NO_CONCEPT = "none"

# Reserved keyword on class lines; cannot be used as a class name.
_ABSTRACT_KW = "abstract"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*$")


@dataclass(frozen=True)
class WordClass:
    name: str
    parent: str | None
    abstract: bool = False
    # Prediction licensing, declared in the lexicon: ("head"|"mod", classes).
    predicts: tuple[str, frozenset[str]] | None = None


@dataclass(frozen=True)
class FeatureStructure:
    """Partial assignment of feature names to non-empty value sets.

    A feature that is not mentioned is maximally underspecified, i.e.
    implicitly carries the feature's full domain.
    """

    assignments: tuple[tuple[str, frozenset[str]], ...] = ()

    @staticmethod
    def of(**values: str | set[str] | frozenset[str]) -> "FeatureStructure":
        items = []
        for name in sorted(values):
            v = values[name]
            vals = frozenset([v]) if isinstance(v, str) else frozenset(v)
            items.append((name, vals))
        return FeatureStructure(tuple(items))

    def get(self, name: str) -> frozenset[str] | None:
        """Value set for ``name``; None means the implicit full domain."""
        for n, v in self.assignments:
            if n == name:
                return v
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.assignments)

    def updated(self, name: str, values: frozenset[str]) -> "FeatureStructure":
        items = [(n, v) for n, v in self.assignments if n != name]
        items.append((name, values))
        items.sort(key=lambda p: p[0])
        return FeatureStructure(tuple(items))

    def as_dict(self) -> dict[str, frozenset[str]]:
        return dict(self.assignments)


EMPTY_FEATURES = FeatureStructure()


@dataclass(frozen=True)
class ValencySlot:
    name: str
    direction: str                      # "left" | "right" relative to the head
    mandatory: bool
    modifier_class: str
    rank: int                           # surface-order rank among one side's dependents
    role: str = NO_ROLE                 # conceptual role filled by the modifier
    max_fillers: int = 1
    agreement: frozenset[str] = frozenset()
    modifier_features: FeatureStructure = EMPTY_FEATURES


@dataclass(frozen=True)
class LexemeEntry:
    surface: str
    lexeme: str
    word_class: str
    features: FeatureStructure
    frame: tuple[ValencySlot, ...]
    concept: str = NO_CONCEPT


@dataclass(frozen=True)
class VirtualSpec:
    """Class-level stand-in for a predicted word: no lexeme, no concept."""

    word_class: str
    features: FeatureStructure
    frame: tuple[ValencySlot, ...]


@dataclass(frozen=True)
class Lexicon:
    classes: dict[str, WordClass]
    features: dict[str, frozenset[str]]
    entries: dict[str, tuple[LexemeEntry, ...]]
    barriers: frozenset[str]
    virtual_frames: dict[str, tuple[ValencySlot, ...]] = field(default_factory=dict)

    # -- lookups -----------------------------------------------------------

    def lookup(self, surface: str) -> tuple[LexemeEntry, ...]:
        """All entries matching ``surface`` exactly; empty for unknown words."""
        return self.entries.get(surface, ())

    def is_barrier(self, surface: str) -> bool:
        return surface in self.barriers

    def word_class(self, name: str) -> WordClass:
        try:
            return self.classes[name]
        except KeyError:
            raise UnknownIdentifierError(f"unknown word class {name!r}") from None

    def is_subclass_of(self, sub: str, sup: str) -> bool:
        """True iff ``sup`` is ``sub`` itself or lies on its parent chain."""
        self.word_class(sup)
        cur: str | None = sub
        while cur is not None:
            cls = self.word_class(cur)
            if cur == sup:
                return True
            cur = cls.parent
        return False

    def non_abstract_descendants(self, name: str) -> frozenset[str]:
        self.word_class(name)
        out = set()
        for cls in self.classes.values():
            if not cls.abstract and self.is_subclass_of(cls.name, name):
                out.add(cls.name)
        return frozenset(out)

    def collapse_predictions(self, names: set[str] | frozenset[str]) -> frozenset[str]:
        """Antichain-minimized cover of a prediction class set.

        Whenever the set contains every non-abstract subclass of some class
        W, those members are replaced by W itself; this is iterated to a
        fixpoint and classes subsumed by another member are dropped.
        """
        current = {n for n in names}
        for n in current:
            self.word_class(n)
        changed = True
        while changed:
            changed = False
            for w in self.classes:  # declaration order: deterministic
                subs = self.non_abstract_descendants(w)
                if subs and subs <= current:
                    replaced = (current - subs) | {w}
                    if replaced != current:
                        current = replaced
                        changed = True
            # drop members strictly subsumed by another member
            for a in sorted(current):
                if any(a != b and self.is_subclass_of(a, b) for b in current):
                    current.discard(a)
                    changed = True
        return frozenset(current)

    def virtual_spec(self, name: str) -> VirtualSpec | None:
        """Virtual-word spec for a predicted class, if a frame is declared."""
        frame = self.virtual_frames.get(name)
        if frame is None:
            return None
        return VirtualSpec(word_class=name, features=EMPTY_FEATURES, frame=frame)

    # -- serialization -----------------------------------------------------

    def serialize(self) -> str:
        """Canonical text form; ``load_lexicon`` parses it back structurally equal."""
        out = ["classes:"]
        for cls in self.classes.values():
            parts = [cls.name]
            if cls.parent is not None:
                parts.append(cls.parent)
            if cls.abstract:
                parts.append(_ABSTRACT_KW)
            if cls.predicts is not None:
                mode, targets = cls.predicts
                parts.append(f"predicts={mode}:{'|'.join(sorted(targets))}")
            out.append(" ".join(parts))
        out.append("features:")
        for name, domain in self.features.items():
            out.append(f"{name} = {'|'.join(sorted(domain))}")
        out.append("barriers:")
        for surface in sorted(self.barriers):
            out.append(surface)
        out.append("entries:")
        for surface in self.entries:
            for e in self.entries[surface]:
                out.append(_format_entry(e))
        if self.virtual_frames:
            out.append("virtual:")
            for name, frame in self.virtual_frames.items():
                out.append(f"{name} {_format_slots(frame)}")
        return "\n".join(out) + "\n"


def _format_features(fs: FeatureStructure) -> str:
    inner = ",".join(f"{n}={'|'.join(sorted(v))}" for n, v in fs.assignments)
    return "{" + inner + "}"


def _format_slot(s: ValencySlot) -> str:
    opt = "mand" if s.mandatory else "opt"
    extra = []
    if s.agreement:
        extra.append("agree=" + ",".join(sorted(s.agreement)))
    if s.modifier_features.assignments:
        inner = ";".join(
            f"{n}:{'|'.join(sorted(v))}" for n, v in s.modifier_features.assignments
        )
        extra.append("feats=" + inner)
    if s.max_fillers != 1:
        extra.append(f"max={s.max_fillers}")
    tail = (" " + " ".join(extra)) if extra else ""
    return f"slot({s.name} {s.direction} {opt} {s.modifier_class} {s.rank} {s.role}{tail})"


def _format_slots(frame: tuple[ValencySlot, ...]) -> str:
    return "[" + ",".join(_format_slot(s) for s in frame) + "]"


def _format_entry(e: LexemeEntry) -> str:
    return " ".join(
        [e.surface, e.lexeme, e.word_class, _format_features(e.features),
         _format_slots(e.frame), e.concept]
    )


# ---------------------------------------------------------------------------
# Loader
# ---------------------------------------------------------------------------

_SECTIONS = ("classes:", "features:", "barriers:", "entries:", "virtual:")


def load_lexicon(text: str, kb_schema=None) -> Lexicon:
    """Parse and validate a lexicon document.

    When ``kb_schema`` is given, every slot role is checked against it
    (role declared on the entry's concept or inherited); engines that own
    both resources perform the same check at session setup.
    """
    classes: dict[str, WordClass] = {}
    features: dict[str, frozenset[str]] = {}
    barriers: set[str] = set()
    entries: dict[str, list[LexemeEntry]] = {}
    virtual_frames: dict[str, tuple[ValencySlot, ...]] = {}

    section = None
    pending_entry_lines: list[tuple[int, str]] = []
    pending_virtual_lines: list[tuple[int, str]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in _SECTIONS:
            section = line[:-1]
            continue
        if section is None:
            raise LexiconParseError(line_no, 1, f"content before any section header: {line!r}")
        if section == "classes":
            _parse_class_line(line_no, line, classes)
        elif section == "features":
            _parse_feature_line(line_no, line, features)
        elif section == "barriers":
            if len(line.split()) != 1:
                raise LexiconParseError(line_no, 1, "barrier line must hold one surface form")
            barriers.add(line)
        elif section == "entries":
            pending_entry_lines.append((line_no, line))
        elif section == "virtual":
            pending_virtual_lines.append((line_no, line))

    if not classes:
        raise LexiconSemanticError(0, "classes", "no word classes declared")
    _validate_class_tree(classes)

    for line_no, line in pending_entry_lines:
        entry = _parse_entry_line(line_no, line, classes, features)
        entries.setdefault(entry.surface, []).append(entry)
    for line_no, line in pending_virtual_lines:
        name, frame = _parse_virtual_line(line_no, line, classes, features)
        virtual_frames[name] = frame

    lex = Lexicon(
        classes=classes,
        features=features,
        entries={s: tuple(es) for s, es in entries.items()},
        barriers=frozenset(barriers),
        virtual_frames=virtual_frames,
    )
    if kb_schema is not None:
        validate_roles(lex, kb_schema)
    return lex


def load_lexicon_file(path, kb_schema=None) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh.read(), kb_schema)


def _parse_class_line(line_no: int, line: str, classes: dict[str, WordClass]) -> None:
    parts = line.split()
    name = parts[0]
    if not _IDENT_RE.match(name) or name == _ABSTRACT_KW:
        raise LexiconParseError(line_no, 1, f"bad class name {name!r}")
    if name in classes:
        raise LexiconSemanticError(line_no, name, "duplicate class")
    parent: str | None = None
    abstract = False
    predicts: tuple[str, frozenset[str]] | None = None
    for tok in parts[1:]:
        if tok == _ABSTRACT_KW:
            abstract = True
        elif tok.startswith("predicts="):
            spec = tok[len("predicts="):]
            if ":" not in spec:
                raise LexiconParseError(line_no, 1, f"bad predicts spec {tok!r}")
            mode, targets = spec.split(":", 1)
            if mode not in ("head", "mod"):
                raise LexiconParseError(line_no, 1, f"predicts mode must be head|mod, got {mode!r}")
            predicts = (mode, frozenset(targets.split("|")))
        elif parent is None:
            parent = tok
        else:
            raise LexiconParseError(line_no, 1, f"trailing garbage on class line: {tok!r}")
    classes[name] = WordClass(name=name, parent=parent, abstract=abstract, predicts=predicts)


def _validate_class_tree(classes: dict[str, WordClass]) -> None:
    roots = [c for c in classes.values() if c.parent is None]
    if len(roots) != 1:
        names = ",".join(c.name for c in roots)
        raise LexiconSemanticError(0, names or "<none>", "class hierarchy must have exactly one root")
    for cls in classes.values():
        if cls.parent is not None and cls.parent not in classes:
            raise LexiconSemanticError(0, cls.parent, f"unknown parent of class {cls.name!r}")
        # cycle check: walk to root, bounded by class count
        seen = set()
        cur = cls.name
        while cur is not None:
            if cur in seen:
                raise LexiconSemanticError(0, cls.name, "cycle in class hierarchy")
            seen.add(cur)
            cur = classes[cur].parent
        if cls.predicts is not None:
            for t in cls.predicts[1]:
                if t not in classes:
                    raise LexiconSemanticError(0, t, f"unknown prediction target on class {cls.name!r}")


def _parse_feature_line(line_no: int, line: str, features: dict[str, frozenset[str]]) -> None:
    if "=" not in line:
        raise LexiconParseError(line_no, 1, "feature line must be 'name = v1|v2|...'")
    name, _, rhs = line.partition("=")
    name = name.strip()
    if not _IDENT_RE.match(name):
        raise LexiconParseError(line_no, 1, f"bad feature name {name!r}")
    if name in features:
        raise LexiconSemanticError(line_no, name, "duplicate feature")
    values = [v.strip() for v in rhs.strip().split("|")]
    if not values or any(not v for v in values):
        raise LexiconParseError(line_no, 1, "feature domain must list non-empty values")
    if len(set(values)) != len(values):
        raise LexiconSemanticError(line_no, name, "duplicate value in feature domain")
    features[name] = frozenset(values)


def _parse_feature_block(line_no: int, block: str,
                         features: dict[str, frozenset[str]],
                         sep: str = ",", kv: str = "=") -> FeatureStructure:
    body = block.strip()
    if not body:
        return EMPTY_FEATURES
    items: dict[str, frozenset[str]] = {}
    for part in body.split(sep):
        if kv not in part:
            raise LexiconParseError(line_no, 1, f"bad feature assignment {part!r}")
        fname, _, fvals = part.partition(kv)
        fname = fname.strip()
        if fname not in features:
            raise LexiconSemanticError(line_no, fname, "undeclared feature")
        vals = frozenset(v.strip() for v in fvals.split("|"))
        bad = vals - features[fname]
        if bad:
            raise LexiconSemanticError(line_no, sorted(bad)[0],
                                       f"value outside domain of feature {fname!r}")
        if fname in items:
            raise LexiconSemanticError(line_no, fname, "feature assigned twice")
        items[fname] = vals
    return FeatureStructure(tuple(sorted(items.items())))


_SLOT_RE = re.compile(r"slot\(([^()]*)\)")


def _parse_slots(line_no: int, block: str, classes: dict[str, WordClass],
                 features: dict[str, frozenset[str]]) -> tuple[ValencySlot, ...]:
    body = block.strip()
    if not body:
        return ()
    slots: list[ValencySlot] = []
    pos = 0
    while pos < len(body):
        m = _SLOT_RE.match(body, pos)
        if not m:
            raise LexiconParseError(line_no, pos + 1, f"expected slot(...) at {body[pos:pos+20]!r}")
        fields = m.group(1).split()
        if len(fields) < 6:
            raise LexiconParseError(line_no, pos + 1,
                                    "slot needs: name dir opt class rank role")
        name, direction, opt, mod_class, rank_s, role = fields[:6]
        if direction not in ("left", "right"):
            raise LexiconParseError(line_no, pos + 1, f"slot direction must be left|right, got {direction!r}")
        if opt not in ("mand", "opt"):
            raise LexiconParseError(line_no, pos + 1, f"slot optionality must be mand|opt, got {opt!r}")
        if mod_class not in classes:
            raise LexiconSemanticError(line_no, mod_class, "unknown modifier class in slot")
        try:
            rank = int(rank_s)
        except ValueError:
            raise LexiconParseError(line_no, pos + 1, f"slot rank must be an integer, got {rank_s!r}") from None
        agreement: frozenset[str] = frozenset()
        mod_feats = EMPTY_FEATURES
        max_fillers = 1
        for extra in fields[6:]:
            if extra.startswith("agree="):
                names = [n for n in extra[len("agree="):].split(",") if n]
                for n in names:
                    if n not in features:
                        raise LexiconSemanticError(line_no, n, "undeclared agreement feature")
                agreement = frozenset(names)
            elif extra.startswith("feats="):
                mod_feats = _parse_feature_block(line_no, extra[len("feats="):],
                                                 features, sep=";", kv=":")
            elif extra.startswith("max="):
                max_fillers = int(extra[len("max="):])
                if max_fillers < 1:
                    raise LexiconParseError(line_no, pos + 1, "max must be positive")
            else:
                raise LexiconParseError(line_no, pos + 1, f"unknown slot option {extra!r}")
        slots.append(ValencySlot(name=name, direction=direction, mandatory=(opt == "mand"),
                                 modifier_class=mod_class, rank=rank, role=role,
                                 max_fillers=max_fillers, agreement=agreement,
                                 modifier_features=mod_feats))
        pos = m.end()
        if pos < len(body):
            if body[pos] != ",":
                raise LexiconParseError(line_no, pos + 1, "slots must be comma separated")
            pos += 1
    for side in ("left", "right"):
        ranks = [s.rank for s in slots if s.direction == side]
        if len(set(ranks)) != len(ranks):
            raise LexiconSemanticError(line_no, side, "duplicate slot rank on one side")
    return tuple(slots)


def _parse_entry_line(line_no: int, line: str, classes: dict[str, WordClass],
                      features: dict[str, frozenset[str]]) -> LexemeEntry:
    m = re.match(r"(\S+)\s+(\S+)\s+(\S+)\s+\{(.*?)\}\s+\[(.*)\]\s+(\S+)\s*$", line)
    if not m:
        raise LexiconParseError(line_no, 1,
                                "entry line must be: surface lexeme class {feats} [slots] concept")
    surface, lexeme, word_class, feat_block, slot_block, concept = m.groups()
    if word_class not in classes:
        raise LexiconSemanticError(line_no, word_class, "unknown word class in entry")
    if classes[word_class].abstract:
        raise LexiconSemanticError(line_no, word_class, "entry uses abstract word class")
    feats = _parse_feature_block(line_no, feat_block, features)
    frame = _parse_slots(line_no, slot_block, classes, features)
    return LexemeEntry(surface=surface, lexeme=lexeme, word_class=word_class,
                       features=feats, frame=frame, concept=concept)


def _parse_virtual_line(line_no: int, line: str, classes: dict[str, WordClass],
                        features: dict[str, frozenset[str]]):
    m = re.match(r"(\S+)\s+\[(.*)\]\s*$", line)
    if not m:
        raise LexiconParseError(line_no, 1, "virtual line must be: class [slots]")
    name, slot_block = m.groups()
    if name not in classes:
        raise LexiconSemanticError(line_no, name, "unknown word class in virtual frame")
    return name, _parse_slots(line_no, slot_block, classes, features)


def validate_roles(lex: Lexicon, kb_schema) -> None:
    """Check every entry's slot roles against the KB schema.

    A slot role must be 'none' or a role defined (possibly by inheritance)
    on the entry's concept; entries without a concept may only use roles
    that exist somewhere in the schema, since their fills are resolved
    through the conceptual projection of the run-time head.
    """
    for entries in lex.entries.values():
        for e in entries:
            for s in e.frame:
                if s.role == NO_ROLE:
                    continue
                if e.concept != NO_CONCEPT:
                    if kb_schema.role_on(e.concept, s.role) is None:
                        raise LexiconSemanticError(
                            0, s.role,
                            f"role not defined on concept {e.concept!r} (entry {e.surface!r})")
                elif not kb_schema.role_exists(s.role):
                    raise LexiconSemanticError(
                        0, s.role, f"role unknown to the schema (entry {e.surface!r})")
