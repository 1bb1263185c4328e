"""Prompt chain per founder: summary -> level -> personas -> flags.

Prompt bodies live in ``prompts/*.txt`` and are rendered by plain placeholder
substitution, so the text sent to the model is exactly the template with the
values dropped in. The three labelling stages each read the raw summary
completion.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

from .ingest import FounderRecord
from .llm_gateway import Gateway, LlmError, LlmRequest, DEFAULT_MODEL
from .taxonomy import FLAG_NAMES, N_FLAGS, PERSONA_LETTERS

logger = logging.getLogger(__name__)

STAGES = ("summary", "level", "personas", "flags")

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


class TemplateError(Exception):
    pass


class LabelParseError(ValueError):
    """A completion did not contain a usable label."""


class LabelNotFoundError(LabelParseError):
    pass


class InvalidLabelError(LabelParseError):
    pass


class StageError(Exception):
    def __init__(self, founder_id: str, stage: str, message: str):
        super().__init__(f"{founder_id}: {stage} stage failed: {message}")
        self.founder_id = founder_id
        self.stage = stage
        self.message = message


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER.findall(self.body))

    def render(self, **values: str) -> str:
        missing = self.placeholders - values.keys()
        if missing:
            raise TemplateError(f"template {self.name!r}: no value for {sorted(missing)}")
        # single pass over the template only; braces inside values stay untouched
        return _PLACEHOLDER.sub(lambda m: values[m.group(1)], self.body)


@lru_cache(maxsize=None)
def load_template(name: str) -> PromptTemplate:
    text = resources.files("founder_success").joinpath(f"prompts/{name}.txt").read_text("utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    return PromptTemplate(name, text)


# ---------------------------------------------------------------- rendering

def render_summary_prompt(r: FounderRecord) -> str:
    return load_template("summary").render(linkedin_json=r.linkedin_doc, org_name=r.org_name)


def render_level_prompt(summary_text: str) -> str:
    return load_template("level_label").render(summary=summary_text)


def render_persona_prompt(summary_text: str) -> str:
    return load_template("persona_label").render(summary=summary_text)


def render_flags_prompt(summary_text: str) -> str:
    return load_template("flags_label").render(summary=summary_text)


_NUMBER_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six", 7: "seven",
    8: "eight", 9: "nine", 10: "ten", 11: "eleven", 12: "twelve", 15: "fifteen",
    20: "twenty", 25: "twenty-five", 30: "thirty",
}


def _count_word(n: int) -> str:
    return _NUMBER_WORDS.get(n, str(n))


def default_level_base() -> str:
    return load_template("levels_base").body


def render_proposal_prompt(
    summaries: Sequence[str], base_taxonomy: str, target_count: int, kind: str = "level"
) -> str:
    """Taxonomy-proposal prompt over a batch of founder summaries.

    ``base_taxonomy`` holds one existing category per non-empty line.
    """
    if not summaries:
        raise ValueError("need at least one summary")
    if kind not in ("level", "persona"):
        raise ValueError(f"unknown taxonomy kind {kind!r}")
    base_count = sum(1 for line in base_taxonomy.splitlines() if line.strip())
    return load_template(f"{kind}_proposal").render(
        summaries=json.dumps(list(summaries), ensure_ascii=False),
        base=base_taxonomy,
        base_count=_count_word(base_count),
        count=_count_word(target_count),
    )


# ---------------------------------------------------------------- summaries

@dataclass(frozen=True)
class PriorCompany:
    name: str
    status: str = ""
    net_worth_usd: float | None = None


@dataclass(frozen=True)
class FounderSummary:
    founder_id: str
    text: str
    narrative: str
    universities: tuple[tuple[str, int | None], ...] | None = None
    prior_experience_years: float | None = None
    prior_companies: tuple[PriorCompany, ...] | None = None


_BLOCK = {n: re.compile(rf"(?m)^[ \t]*{n}\)[ \t]*") for n in (1, 2, 3)}
_NOT_AVAILABLE = re.compile(
    r"^(?:not available|not applicable|n/?a|none|unknown|no information.*|no data.*|-)\.?$", re.I
)
_UNIVERSITY = re.compile(r"^(.+?),?\s*#\s*([0-9]+|[A-Za-z/]+)")
_NUMBER = re.compile(r"[0-9]+(?:\.[0-9]+)?")
_MONEY = re.compile(r"^\$?\s*([0-9]+(?:\.[0-9]+)?)\s*([KMB])?\b", re.I)
_SCALE = {"K": 1e3, "M": 1e6, "B": 1e9}


def _find_blocks(text: str) -> dict[int, tuple[int, int]]:
    """Start offsets (marker, body) of the numbered answer blocks."""
    found: dict[int, tuple[int, int]] = {}
    starts = list(_BLOCK[1].finditer(text))
    after = 0
    if starts:
        m = starts[-1]
        found[1] = (m.start(), m.end())
        after = m.end()
    for n in (2, 3):
        m = _BLOCK[n].search(text, after)
        if m:
            found[n] = (m.start(), m.end())
            after = m.end()
    return found


def _answer_lines(body: str) -> list[str]:
    lines = [ln.strip() for ln in body.strip().splitlines() if ln.strip()]
    if not lines:
        return []
    if len(lines) > 1:
        answer = lines[1:]
    else:
        head, sep, tail = lines[0].rpartition(":")
        answer = [tail] if sep else [lines[0]]
    cleaned = []
    for ln in answer:
        ln = ln.strip().lstrip("-*• \t").strip().strip("$").strip()
        if ln:
            cleaned.append(ln)
    return cleaned


def _is_not_available(lines: list[str]) -> bool:
    return all(_NOT_AVAILABLE.match(ln) for ln in lines)


def _parse_universities(lines: list[str]) -> tuple[tuple[str, int | None], ...]:
    if _is_not_available(lines):
        return ()
    out = []
    for ln in lines:
        for part in ln.split(";"):
            part = part.strip().rstrip(".").strip()
            if not part:
                continue
            m = _UNIVERSITY.match(part)
            if m:
                rank = m.group(2)
                out.append((m.group(1).strip().rstrip(","), int(rank) if rank.isdigit() else None))
            else:
                out.append((part, None))
    return tuple(out)


def _parse_years(lines: list[str]) -> float | None:
    m = _NUMBER.search(" ".join(lines))
    return float(m.group(0)) if m else None


def parse_money(text: str) -> float | None:
    m = _MONEY.match(text.strip().replace(",", ""))
    if not m:
        return None
    return float(m.group(1)) * _SCALE.get((m.group(2) or "").upper(), 1.0)


def _parse_companies(lines: list[str]) -> tuple[PriorCompany, ...]:
    out = []
    for ln in lines:
        ln = ln.strip().rstrip(".;").strip()
        if not ln or _NOT_AVAILABLE.match(ln):
            continue
        parts = [p.strip() for p in ln.rsplit(",", 2)]
        name = parts[0]
        status = parts[1] if len(parts) > 1 else ""
        worth = parse_money(parts[2]) if len(parts) > 2 else None
        out.append(PriorCompany(name, status, worth))
    return tuple(out)


def parse_summary(founder_id: str, text: str) -> FounderSummary:
    """Split a summary completion into narrative and the three answer blocks.

    Blocks that are missing or unreadable come back as ``None``.
    """
    blocks = _find_blocks(text)
    if not blocks:
        return FounderSummary(founder_id, text, text.strip())
    narrative = text[: min(start for start, _ in blocks.values())].strip()
    order = sorted(blocks.items(), key=lambda kv: kv[1][0])
    bodies: dict[int, list[str]] = {}
    for i, (n, (_, body_start)) in enumerate(order):
        end = order[i + 1][1][0] if i + 1 < len(order) else len(text)
        bodies[n] = _answer_lines(text[body_start:end])
    universities = years = companies = None
    if 1 in bodies:
        universities = _parse_universities(bodies[1])
    if 2 in bodies:
        years = _parse_years(bodies[2])
    if 3 in bodies:
        companies = _parse_companies(bodies[3])
    return FounderSummary(founder_id, text, narrative, universities, years, companies)


# ---------------------------------------------------------------- label parsers

_LEVEL = re.compile(r"(?<![A-Za-z0-9])[Ll]([0-9]{1,3})(?![0-9])")
_BRACKETS = re.compile(r"\[([^\[\]]*)\]")


def format_level(level: int) -> str:
    return f"L{level}"


def parse_level(text: str) -> int:
    m = _LEVEL.search(text)
    if m is None:
        raise LabelNotFoundError("no level label like 'L7' in completion")
    level = int(m.group(1))
    if not 1 <= level <= 10:
        raise InvalidLabelError(f"level L{m.group(1)} outside L1-L10")
    return level


def _last_list(text: str) -> list[str]:
    lists = _BRACKETS.findall(text)
    if not lists:
        raise LabelNotFoundError("no bracketed list in completion")
    inner = lists[-1].strip()
    if not inner:
        raise InvalidLabelError("empty list")
    return [tok.strip() for tok in inner.split(",")]


def format_personas(personas) -> str:
    return "[" + ", ".join(sorted(personas)) + "]"


def parse_personas(text: str) -> frozenset[str]:
    out = set()
    for tok in _last_list(text):
        letter = tok.strip(" \t\r\n'\"()").upper()
        if letter not in PERSONA_LETTERS:
            raise InvalidLabelError(f"invalid persona {tok!r}")
        out.add(letter)
    return frozenset(out)


@dataclass(frozen=True)
class FlagVector:
    values: tuple[bool, ...]

    def __post_init__(self):
        if len(self.values) != N_FLAGS:
            raise ValueError(f"flag vector needs {N_FLAGS} entries, got {len(self.values)}")

    def __getitem__(self, name: str) -> bool:
        return self.values[FLAG_NAMES.index(name)]

    def as_dict(self) -> dict[str, bool]:
        return dict(zip(FLAG_NAMES, self.values))

    def as_ints(self) -> list[int]:
        return [int(v) for v in self.values]


def format_flags(flags: FlagVector) -> str:
    return "[" + ",".join(str(v) for v in flags.as_ints()) + "]"


def parse_flags(text: str) -> FlagVector:
    tokens = _last_list(text)
    if len(tokens) != N_FLAGS:
        raise InvalidLabelError(f"expected {N_FLAGS} flags, got {len(tokens)}")
    values = []
    for tok in tokens:
        if tok not in ("0", "1"):
            raise InvalidLabelError(f"non-binary flag value {tok!r}")
        values.append(tok == "1")
    return FlagVector(tuple(values))


@dataclass(frozen=True)
class SegmentLabels:
    founder_id: str
    level: int
    personas: frozenset[str]
    flags: FlagVector

    def __post_init__(self):
        if not 1 <= self.level <= 10:
            raise ValueError(f"level {self.level} outside 1..10")
        if not self.personas or not set(self.personas) <= set(PERSONA_LETTERS):
            raise ValueError(f"invalid persona set {sorted(self.personas)}")


# ---------------------------------------------------------------- stages

@dataclass(frozen=True)
class ChainSettings:
    model_id: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_output_tokens: int = 2048


_CORRECTIONS = {
    "level": 'Reply with ONLY the level assignment, for example "L10", and nothing else.',
    "personas": 'Reply with ONLY the persona list, for example "[D, J]", and nothing else.',
    "flags": f"Reply with ONLY the integer list of {N_FLAGS} values (0 or 1), and nothing else.",
}


def correction_prompt(stage: str, prompt: str, first_reply: str) -> str:
    """The single corrective re-prompt sent after an unparseable label reply."""
    return f"{prompt}\n\n{first_reply}\n\n{_CORRECTIONS[stage]}"


def _request(prompt: str, stage: str, settings: ChainSettings) -> LlmRequest:
    return LlmRequest(
        prompt=prompt,
        model_id=settings.model_id,
        temperature=settings.temperature,
        max_output_tokens=settings.max_output_tokens,
        stage=stage,
    )


def generate_summary(r: FounderRecord, gw: Gateway, settings: ChainSettings = ChainSettings()) -> FounderSummary:
    resp = gw.complete(_request(render_summary_prompt(r), "summary", settings))
    return parse_summary(r.founder_id, resp.text)


def _label_stage(stage, render, parse, s: FounderSummary, gw: Gateway, settings: ChainSettings):
    if not s.narrative.strip():
        raise StageError(s.founder_id, stage, "summary narrative is empty")
    prompt = render(s.text)
    first = gw.complete(_request(prompt, stage, settings)).text
    try:
        return parse(first)
    except LabelParseError as exc:
        logger.info("%s: %s parse failed (%s); re-prompting once", s.founder_id, stage, exc)
    retry_prompt = correction_prompt(stage, prompt, first)
    second = gw.complete(_request(retry_prompt, stage, settings)).text
    try:
        return parse(second)
    except LabelParseError as exc:
        raise StageError(s.founder_id, stage, f"unparseable after retry: {exc}") from exc


def assign_level(s: FounderSummary, gw: Gateway, settings: ChainSettings = ChainSettings()) -> int:
    return _label_stage("level", render_level_prompt, parse_level, s, gw, settings)


def assign_personas(s: FounderSummary, gw: Gateway, settings: ChainSettings = ChainSettings()) -> frozenset[str]:
    return _label_stage("personas", render_persona_prompt, parse_personas, s, gw, settings)


def assign_flags(s: FounderSummary, gw: Gateway, settings: ChainSettings = ChainSettings()) -> FlagVector:
    return _label_stage("flags", render_flags_prompt, parse_flags, s, gw, settings)


def propose_taxonomy(
    summaries: Sequence[str],
    base_taxonomy: str,
    target_count: int,
    gw: Gateway,
    kind: str = "level",
    settings: ChainSettings = ChainSettings(),
) -> str:
    """Ask the model for an expanded taxonomy; the raw text is returned for review."""
    prompt = render_proposal_prompt(summaries, base_taxonomy, target_count, kind)
    text = gw.complete(_request(prompt, f"{kind}_proposal", settings)).text
    if not text.strip():
        raise LlmError("empty taxonomy proposal")
    return text


@dataclass
class ChainResult:
    founder_id: str
    summary: FounderSummary | None = None
    level: int | None = None
    personas: frozenset[str] | None = None
    flags: FlagVector | None = None
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def labels(self) -> SegmentLabels | None:
        if self.level is None or self.personas is None or self.flags is None:
            return None
        return SegmentLabels(self.founder_id, self.level, self.personas, self.flags)

    def to_dict(self) -> dict:
        return {
            "founder_id": self.founder_id,
            "summary": self.summary.text if self.summary else None,
            "level": self.level,
            "personas": sorted(self.personas) if self.personas is not None else None,
            "flags": self.flags.as_ints() if self.flags is not None else None,
            "errors": dict(sorted(self.errors.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainResult":
        fid = d["founder_id"]
        return cls(
            founder_id=fid,
            summary=parse_summary(fid, d["summary"]) if d.get("summary") is not None else None,
            level=d.get("level"),
            personas=frozenset(d["personas"]) if d.get("personas") is not None else None,
            flags=FlagVector(tuple(bool(v) for v in d["flags"])) if d.get("flags") is not None else None,
            errors=dict(d.get("errors") or {}),
        )


def run_chain(r: FounderRecord, gw: Gateway, settings: ChainSettings = ChainSettings()) -> ChainResult:
    """Run all four stages for one founder.

    A failing labelling stage is recorded in ``errors`` and the remaining
    stages still run; without a summary nothing else can.
    """
    result = ChainResult(r.founder_id)
    try:
        result.summary = generate_summary(r, gw, settings)
    except (LlmError, StageError) as exc:
        result.errors["summary"] = str(exc)
        return result
    stages: list[tuple[str, Callable]] = [
        ("level", assign_level),
        ("personas", assign_personas),
        ("flags", assign_flags),
    ]
    for name, fn in stages:
        try:
            setattr(result, name, fn(result.summary, gw, settings))
        except (LlmError, StageError) as exc:
            result.errors[name] = str(exc)
    return result
