"""Synthetic founder pool for demos and end-to-end tests.

Writes two founder CSVs shaped like the real input (``founder_id``,
``org_name``, ``linkedin_json``) plus a mock-LLM fixture file with a canned
completion for every prompt the labelling chain will send. Labels and
education depend on a hidden quality score that is higher for successful
founders, so the classifiers have something to find. A handful of malformed
rows exercise the ingest skip/drop paths.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import FounderRecord
from .llm_gateway import prompt_fingerprint
from .segmentation import (
    FlagVector,
    correction_prompt,
    format_flags,
    format_personas,
    render_flags_prompt,
    render_level_prompt,
    render_persona_prompt,
    render_summary_prompt,
)
from .taxonomy import N_FLAGS, PERSONA_LETTERS

FIRST = ["Alex", "Sam", "Jordan", "Taylor", "Morgan", "Casey", "Riley", "Jamie", "Avery", "Quinn", "Devon", "Rowan"]
LAST = ["Chen", "Garcia", "Smith", "Okafor", "Novak", "Patel", "Kim", "Silva", "Muller", "Haddad", "Ito", "Berg"]
CITIES = ["San Francisco", "New York", "London", "Berlin", "Bangalore", "Toronto", "Tel Aviv", "Austin"]
SCHOOLS = [
    ("Stanford University", 5),
    ("MIT", 1),
    ("University of Michigan", 33),
    ("Ohio State University", 190),
    ("University of Toronto", 25),
    ("Technical University of Munich", 37),
    ("Arizona State University", 200),
    ("IIT Bombay", 149),
]
FIELDS = [
    "Computer Science",
    "Business Administration",
    "Economics",
    "Mechanical Engineering",
    "Biology",
    "Mathematics",
    "History",
    "Marketing",
    "Architecture",
    "Political Science",
    "Electrical Engineering",
    "Finance",
]
DEGREES = {0: None, 1: "Bachelor of Science - BS", 2: "Master of Science - MS", 3: "Doctor of Philosophy - PhD"}
COMPANIES = ["Google", "Acme Corp", "Stripe", "Deloitte", "Oracle", "Initech", "Globex", "Meta", "Umbrella Labs"]
TITLES = ["Software Engineer", "Product Manager", "Analyst", "Director of Engineering", "Consultant", "VP Sales"]


@dataclass(frozen=True)
class SyntheticPool:
    successful_csv: Path
    unsuccessful_csv: Path
    fixtures: Path
    n_valid: int
    n_retries: int


def _sigmoid(z: float) -> float:
    return 1.0 / (1.0 + np.exp(-z))


def _profile(rng: np.random.Generator, q: float, name: str) -> tuple[dict, list, list]:
    degree = int(np.clip(round(1.2 + 0.6 * q + rng.normal(0, 0.8)), 0, 3))
    schools = []
    education = []
    start = int(rng.integers(1990, 2010))
    if degree >= 1:
        for level in range(1, degree + 1):
            school, rank = SCHOOLS[int(rng.integers(len(SCHOOLS)))]
            length = 4 if level == 1 else int(rng.integers(1, 6))
            education.append(
                {
                    "school": school,
                    "degree_name": DEGREES[level],
                    "field_of_study": FIELDS[int(rng.integers(len(FIELDS)))],
                    "starts_at": {"year": start},
                    "ends_at": {"year": start + length},
                }
            )
            schools.append((school, rank))
            start += length
    jobs = []
    year = start
    for _ in range(int(rng.integers(0, 4))):
        length = round(float(rng.uniform(0.5, 6.0)), 2)
        jobs.append(
            {
                "company": COMPANIES[int(rng.integers(len(COMPANIES)))],
                "title": TITLES[int(rng.integers(len(TITLES)))],
                "starts_at": {"year": year},
                "ends_at": {"year": year + int(np.ceil(length))},
                "years": length,
            }
        )
        year += int(np.ceil(length))
    doc = {
        "full_name": name,
        "city": CITIES[int(rng.integers(len(CITIES)))],
        "education": education,
        "experiences": [{k: v for k, v in j.items() if k != "years"} for j in jobs],
    }
    return doc, schools, jobs


def _summary_text(doc: dict, org: str, founded: int, schools, jobs) -> str:
    edu = "; ".join(f"{e['degree_name']} in {e['field_of_study']} at {e['school']}" for e in doc["education"])
    work = "; ".join(f"{j['title']} at {j['company']} for {j['years']} years" for j in jobs)
    narrative = (
        f"{doc['full_name']} currently resides in {doc['city']}. Their latest founded company is {org}, "
        f"started in {founded}. Education: {edu or 'no formal degree listed'}. "
        f"Before founding {org} they worked as {work or 'an independent builder'}."
    )
    unis = "; ".join(f"{s}, #{r}" for s, r in schools) + "." if schools else "Not available"
    total = round(sum(j["years"] for j in jobs), 2)
    return (
        f"{narrative}\n\n"
        "1) The universities where the founder studied, along with their global rankings "
        "(university, #ranking):\n"
        f"{unis}\n\n"
        f"2) The total time period of work experience (in years) BEFORE the individual founded {org}:\n"
        f"{total} years.\n\n"
        f"3) The companies founded/co-founded by them BEFORE founding {org}:\n"
        "Not available.\n"
    )


def _level_reply(rng, level: int) -> str:
    style = int(rng.integers(3))
    if style == 0:
        return f"L{level}"
    if style == 1:
        return f"  l{level}\n"
    return f"Weighing the track record against the definitions, the best match is L{level}."


def _persona_reply(rng, personas) -> str:
    body = format_personas(personas)
    return body if rng.random() < 0.5 else f"Reviewing the background step by step.\nFinal assignment: {body}"


def _flags_reply(rng, flags: FlagVector) -> str:
    body = format_flags(flags)
    return body if rng.random() < 0.5 else f"Flags in order: {body}"


def generate(
    out_dir: str | Path,
    n_successful: int = 200,
    n_unsuccessful: int = 240,
    seed: int = 0,
    messy_rate: float = 0.03,
    malformed_rows: bool = True,
) -> SyntheticPool:
    """Write the pool into ``out_dir`` and return the file paths.

    ``messy_rate`` is the share of label replies that are unparseable on the
    first attempt; their corrective re-prompt is answered cleanly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    persona_w = rng.uniform(-1.5, 1.5, len(PERSONA_LETTERS))
    flag_w = rng.uniform(-1.5, 1.5, N_FLAGS)
    fixtures: list[dict] = []
    retries = 0
    rows = {True: [], False: []}

    def add(prompt: str, completion: str) -> None:
        fixtures.append({"fingerprint": prompt_fingerprint(prompt), "completion": completion})

    def label(stage: str, prompt: str, clean: str) -> None:
        nonlocal retries
        if rng.random() < messy_rate:
            first = "I cannot decide on a single answer from this summary."
            add(prompt, first)
            add(correction_prompt(stage, prompt, first), clean)
            retries += 1
        else:
            add(prompt, clean)

    for success, count, tag in ((True, n_successful, "s"), (False, n_unsuccessful, "u")):
        for i in range(count):
            fid = f"syn-{tag}-{i:04d}"
            q = float(rng.normal(1.0 if success else -0.6, 1.0))
            name = f"{FIRST[int(rng.integers(len(FIRST)))]} {LAST[int(rng.integers(len(LAST)))]}"
            org = f"{LAST[int(rng.integers(len(LAST)))]} {['Labs', 'AI', 'Health', 'Robotics', 'Pay'][i % 5]}"
            doc, schools, jobs = _profile(rng, q, name)
            doc_text = json.dumps(doc, sort_keys=True)
            rows[success].append([fid, org, doc_text])

            rec = FounderRecord(fid, doc_text, org, success)
            summary = _summary_text(doc, org, 2015 + i % 8, schools, jobs)
            add(render_summary_prompt(rec), summary)

            level = int(np.clip(round(3.5 + 1.8 * q + rng.normal(0, 1.2)), 1, 10))
            personas = {p for p, w in zip(PERSONA_LETTERS, persona_w) if rng.random() < _sigmoid(-1.6 + w * q)}
            flags = FlagVector(tuple(bool(rng.random() < _sigmoid(-0.4 + w * q)) for w in flag_w))
            label("level", render_level_prompt(summary), _level_reply(rng, level))
            label("personas", render_persona_prompt(summary), _persona_reply(rng, personas or {"T"}))
            label("flags", render_flags_prompt(summary), _flags_reply(rng, flags))

    n_valid = n_successful + n_unsuccessful
    if malformed_rows:
        rows[True] += [["syn-s-bad-empty", "Ghost Inc", ""], ["syn-s-bad-trunc", "Half Ltd", '{"full_name": "X", "educ']]
        rows[False] += [["syn-u-bad-list", "List Co", "[1, 2, 3]"], ["syn-u-no-org", "", "{}"]]

    paths = {}
    for success, stem in ((True, "successful"), (False, "unsuccessful")):
        path = out / f"{stem}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["founder_id", "org_name", "linkedin_json"])
            w.writerows(rows[success])
            if malformed_rows and success:
                fh.write("syn-s-short-row\n")
        paths[success] = path
    fx = out / "mock_completions.jsonl"
    fx.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in fixtures), encoding="utf-8")
    return SyntheticPool(paths[True], paths[False], fx, n_valid, retries)
