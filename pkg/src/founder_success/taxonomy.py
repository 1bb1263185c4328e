"""Label vocabularies: founder levels L1-L10, personas A-T, the 23 boolean flags.

Note on personas R and S: they came out of an unsupervised LLM proposal step
and encode military service and gender. They are kept as generated so results
stay comparable, but any use of these columns for real decisions needs a bias
review first.
"""

from __future__ import annotations

import string

LEVELS: dict[int, str] = {
    10: "Serial entrepreneur with multiple exits or IPOs above 100M+.",
    9: "Previously led a unicorn (valuation > $1B) before the current company.",
    8: "Tech visionary or industry innovator who disrupted or created markets.",
    7: "Previously scaled a startup with 50M-100M funding toward IPO or major exit.",
    6: "Medium to large exit, possibly key executive roles at notable tech companies.",
    5: "Previous company raised 100M+ with a pending IPO.",
    4: "Small to medium exit or significant role at a notable technology company.",
    3: "10-15 years of technical and management expertise, possibly a relevant PhD.",
    2: "A few years of startup experience, possibly an accelerator graduate.",
    1: "Relatively new to tech, negligible experience but high potential.",
}
LEVEL_RANGE = range(1, 11)

PERSONA_LETTERS: tuple[str, ...] = tuple(string.ascii_uppercase[:20])  # A..T

PERSONAS: dict[str, str] = {
    "A": "Successful serial entrepreneur who built a public company.",
    "B": "Successful serial entrepreneur who had a company with exit over $100M.",
    "C": "Fresh graduate who founded a company within a year after university.",
    "D": "First-time entrepreneur who founded within 3-5 years of finishing university.",
    "E": "Holds a PhD or is/was a researcher or university professor.",
    "F": "First-time non-tech entrepreneur with 10+ years in non-tech industries.",
    "G": "Tech executive at tech companies for over 10 years.",
    "H": "Engineer/executive at a unicorn company.",
    "I": "Background as an engineer or product manager at a tech firm.",
    "J": "Founder with an MBA.",
    "K": "Lived or worked in multiple countries.",
    "L": "Serial entrepreneur with at least two companies started before.",
    "M": "Corporate background with less than 10 years of total experience.",
    "N": "Background in finance, accounting, or economics.",
    "O": "Pivoted from arts/humanities to tech entrepreneurship.",
    "P": "Experience in nonprofit organizations or social entrepreneurship.",
    "Q": "Notable awards or industry recognition (e.g. Forbes 30 under 30).",
    "R": "Military service background.",
    "S": "Female founder with notable achievements in male-dominated industries.",
    "T": "None of the above.",
}

FLAG_NAMES: tuple[str, ...] = (
    "is_firsttime_founder",
    "is_researcher",
    "is_phd",
    "is_scholarship",
    "is_young_grad",
    "is_dropout",
    "top_tier_uni",
    "multiple_degrees",
    "entrepreneurship_education",
    "few_years_experience",
    "decade_experience",
    "big_tech_experience",
    "comm_experience",
    "exec_experience",
    "is_investor",
    "is_board_member",
    "international_uni",
    "lived_multiple_countries",
    "has_job_hopped",
    "has_promotions",
    "is_top_tier_consultant",
    "is_top_tier_banker",
    "founded_under_30",
)
N_FLAGS = len(FLAG_NAMES)
assert N_FLAGS == 23
