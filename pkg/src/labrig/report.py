"""Structured model and validator for report.tex, TODO.md, and references.

The report is plain LaTeX with a machine-managed region between the
``% ==== EXPERIMENTS BEGIN/END ====`` markers. Each experiment is a
``\\subsection{EXXX: <title>}`` whose body carries the seven required
fields as ``\\paragraph{<Field>}`` blocks. Claims and tier-3 result
references ride along as ``%%`` comment annotations so the rendered
document stays clean; no LaTeX engine is involved in validation.
"""

from __future__ import annotations

import difflib
import json
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConflictError, ReportError, ValidationError
from .ids import METRIC_NAME_RE, NUMBER_RE, ExperimentId, parse_experiment_id

REQUIRED_FIELDS = (
    "Goal",
    "Hypothesis",
    "Method",
    "Implementation",
    "Results",
    "Analysis",
    "NextSteps",
)
# on-disk paragraph headings; every other field renders as its own name
_FIELD_DISPLAY = {"NextSteps": "Next Steps"}
_DISPLAY_TO_FIELD = {v: k for k, v in _FIELD_DISPLAY.items()}

BEGIN_MARKER = "% ==== EXPERIMENTS BEGIN ===="
END_MARKER = "% ==== EXPERIMENTS END ===="

GRADES = ("verified", "partially_verified", "unverified")

_SUBSECTION_RE = re.compile(r"^\\subsection\{(E[0-9]{3,}): (.*)\}\s*$")
_PARAGRAPH_RE = re.compile(r"^\\paragraph\{([^}]*)\}\s*(.*)$")
_CLAIM_RE = re.compile(r"^%% claim\[([^\]]*)\] (.*)$")
_RESULT_RE = re.compile(r"^%% result\[tier=([0-9]+)\] ([A-Za-z_][A-Za-z0-9_.]*)=(\S+)\s*$")


@dataclass(frozen=True)
class Claim:
    text: str
    grade: str = "unverified"
    evidence_path: str | None = None
    evidence_status: str | None = None  # "pass" | "fail"
    line: int = 0  # 1-based line in report.tex; 0 for unplaced claims

    def __post_init__(self):
        if self.grade not in GRADES:
            raise ValidationError(f"unknown claim grade {self.grade!r}")
        if self.evidence_path is not None:
            if re.search(r"[\s,\]]", self.evidence_path):
                raise ValidationError(
                    f"evidence path {self.evidence_path!r} may not contain whitespace, ',' or ']'"
                )
            if self.evidence_status not in ("pass", "fail"):
                raise ValidationError("evidence requires a pass/fail status")

    @property
    def sound(self) -> bool:
        """A verified claim needs passing evidence; other grades always pass."""
        if self.grade != "verified":
            return True
        return self.evidence_path is not None and self.evidence_status == "pass"


@dataclass(frozen=True)
class ExperimentSection:
    id: ExperimentId
    title: str
    fields: dict[str, str]  # exactly REQUIRED_FIELDS, in order
    claims: tuple[Claim, ...] = ()
    results_refs: tuple[tuple[int, str, float], ...] = ()
    start_line: int = 0
    end_line: int = 0


@dataclass(frozen=True)
class ReportDocument:
    sections: tuple[ExperimentSection, ...]
    lines: tuple[str, ...]  # full file, for splicing
    region_start: int  # line index of BEGIN marker (0-based)
    region_end: int  # line index of END marker

    def section(self, exp_id: ExperimentId) -> ExperimentSection:
        for s in self.sections:
            if s.id == exp_id:
                return s
        raise ValidationError(f"no report section for {exp_id}")

    def ids(self) -> set[ExperimentId]:
        return {s.id for s in self.sections}


def report_skeleton(project_name: str) -> str:
    return (
        "% Experiment log. The region between the EXPERIMENTS markers is\n"
        "% machine-managed; append sections through the harness only.\n"
        "\\documentclass{article}\n"
        "\\usepackage{amsmath}\n"
        "\\usepackage{booktabs}\n"
        f"\\title{{{project_name}}}\n"
        "\\begin{document}\n"
        "\\maketitle\n"
        "\\section{Experiments}\n"
        f"{BEGIN_MARKER}\n"
        f"{END_MARKER}\n"
        "\\end{document}\n"
    )


def parse_report(text: str, filename: str = "report.tex") -> ReportDocument:
    """Parse and structurally validate the experiment region.

    Raises ReportError listing every problem found (missing or empty
    required fields, duplicate ids, malformed annotations, result
    references to tiers below 3). Claim-grade soundness is NOT a parse
    error; see claim_violations().
    """
    lines = text.split("\n")
    errors: list[str] = []

    begin = end = -1
    for i, line in enumerate(lines):
        if line.strip() == BEGIN_MARKER:
            begin = i
        elif line.strip() == END_MARKER:
            end = i
    if begin == -1 or end == -1 or end < begin:
        raise ReportError([f"{filename}: experiment region markers missing or out of order"])

    sections: list[ExperimentSection] = []
    seen: dict[ExperimentId, int] = {}

    i = begin + 1
    current: dict | None = None

    def close_current(end_line: int):
        nonlocal current
        if current is None:
            return
        sec_errors = _finalize_section(current, end_line, filename)
        errors.extend(sec_errors)
        if not sec_errors:
            sec = current["section"]
            if sec.id in seen:
                errors.append(
                    f"{filename}:{current['start'] + 1}: duplicate section id {sec.id}"
                    f" (first at line {seen[sec.id] + 1})"
                )
            else:
                seen[sec.id] = current["start"]
                sections.append(sec)
        current = None

    while i < end:
        line = lines[i]
        m = _SUBSECTION_RE.match(line)
        if m:
            close_current(i)
            try:
                sec_id = parse_experiment_id(m.group(1))
            except ValidationError:
                errors.append(f"{filename}:{i + 1}: malformed section id {m.group(1)!r}")
                sec_id = None
            current = {
                "id": sec_id,
                "title": m.group(2),
                "start": i,
                "fields": {},
                "order": [],
                "claims": [],
                "results": [],
                "active_field": None,
            }
            i += 1
            continue
        if current is None:
            if line.strip():
                errors.append(f"{filename}:{i + 1}: content outside any experiment section")
            i += 1
            continue
        m = _PARAGRAPH_RE.match(line)
        if m:
            display = m.group(1)
            fname = _DISPLAY_TO_FIELD.get(display, display)
            if fname not in REQUIRED_FIELDS:
                errors.append(f"{filename}:{i + 1}: unknown field {display!r} in {current['id']}")
                current["active_field"] = None
            elif fname in current["fields"]:
                errors.append(f"{filename}:{i + 1}: repeated field {display!r} in {current['id']}")
                current["active_field"] = None
            else:
                current["fields"][fname] = [m.group(2)]
                current["order"].append(fname)
                current["active_field"] = fname
            i += 1
            continue
        m = _CLAIM_RE.match(line)
        if m:
            claim, err = _parse_claim(m.group(1), m.group(2), i + 1, filename)
            if err:
                errors.append(err)
            else:
                current["claims"].append(claim)
            i += 1
            continue
        if line.startswith("%% result["):
            m = _RESULT_RE.match(line)
            if not m:
                errors.append(f"{filename}:{i + 1}: malformed result annotation")
            else:
                tier = int(m.group(1))
                if tier != 3:
                    errors.append(
                        f"{filename}:{i + 1}: {current['id']} Results reference tier {tier};"
                        " only tier-3 results may back the report"
                    )
                elif not NUMBER_RE.fullmatch(m.group(3)):
                    errors.append(f"{filename}:{i + 1}: malformed result value {m.group(3)!r}")
                else:
                    current["results"].append((tier, m.group(2), float(m.group(3))))
            i += 1
            continue
        if current["active_field"] is not None:
            current["fields"][current["active_field"]].append(line)
        elif line.strip() and not line.lstrip().startswith("%"):
            errors.append(f"{filename}:{i + 1}: content before first field in {current['id']}")
        i += 1

    close_current(end)

    if errors:
        raise ReportError(errors)
    return ReportDocument(
        sections=tuple(sections), lines=tuple(lines), region_start=begin, region_end=end
    )


def _finalize_section(current: dict, end_line: int, filename: str) -> list[str]:
    errors = []
    loc = f"{filename}:{current['start'] + 1}"
    if current["id"] is None:
        return [f"{loc}: section skipped (bad id)"]
    sec_id = current["id"]
    fields: dict[str, str] = {}
    for fname in REQUIRED_FIELDS:
        if fname not in current["fields"]:
            errors.append(f"{loc}: {sec_id} missing {fname}")
            continue
        body = "\n".join(current["fields"][fname]).strip()
        if not body:
            errors.append(f"{loc}: {sec_id} has empty {fname}")
        fields[fname] = body
    if current["order"] != [f for f in REQUIRED_FIELDS if f in current["fields"]]:
        errors.append(f"{loc}: {sec_id} fields out of canonical order")
    if errors:
        return errors
    current["section"] = ExperimentSection(
        id=sec_id,
        title=current["title"],
        fields=fields,
        claims=tuple(current["claims"]),
        results_refs=tuple(current["results"]),
        start_line=current["start"] + 1,
        end_line=end_line,
    )
    return []


def _parse_claim(attrs: str, text: str, line: int, filename: str):
    grade = None
    evidence = None
    status = None
    for part in attrs.split(","):
        if "=" not in part:
            return None, f"{filename}:{line}: malformed claim attribute {part!r}"
        key, value = part.split("=", 1)
        if key == "grade":
            grade = value
        elif key == "evidence":
            evidence = value
        elif key == "status":
            status = value
        else:
            return None, f"{filename}:{line}: unknown claim attribute {key!r}"
    if grade not in GRADES:
        return None, f"{filename}:{line}: unknown claim grade {grade!r}"
    if (evidence is None) != (status is None):
        return None, f"{filename}:{line}: claim evidence and status must appear together"
    if status is not None and status not in ("pass", "fail"):
        return None, f"{filename}:{line}: claim evidence status must be pass or fail"
    if not text.strip():
        return None, f"{filename}:{line}: empty claim text"
    try:
        claim = Claim(
            text=text, grade=grade, evidence_path=evidence, evidence_status=status, line=line
        )
    except ValidationError as exc:
        return None, f"{filename}:{line}: {exc}"
    return claim, None


def render_section(section: ExperimentSection) -> str:
    out = [f"\\subsection{{{section.id}: {section.title}}}"]
    for fname in REQUIRED_FIELDS:
        display = _FIELD_DISPLAY.get(fname, fname)
        out.append(f"\\paragraph{{{display}}} {section.fields[fname]}")
        if fname == "Results":
            for tier, name, value in section.results_refs:
                out.append(f"%% result[tier={tier}] {name}={repr(float(value))}")
    for claim in section.claims:
        out.append(render_claim(claim))
    return "\n".join(out)


def render_claim(claim: Claim) -> str:
    attrs = f"grade={claim.grade}"
    if claim.evidence_path is not None:
        attrs += f",evidence={claim.evidence_path},status={claim.evidence_status}"
    return f"%% claim[{attrs}] {claim.text}"


def validate_section(section: ExperimentSection) -> list[str]:
    """Field-level problems with a section, independent of any document."""
    errors = []
    for fname in REQUIRED_FIELDS:
        body = section.fields.get(fname, "")
        if not body.strip():
            errors.append(f"{section.id} missing or empty {fname}")
    for tier, name, _ in section.results_refs:
        if tier != 3:
            errors.append(f"{section.id} references tier {tier} in Results; only tier 3 allowed")
        if not METRIC_NAME_RE.fullmatch(name):
            errors.append(f"{section.id} has malformed result metric name {name!r}")
    for idx, claim in enumerate(section.claims):
        if not claim.sound:
            errors.append(
                f"{section.id} claim {idx} is graded verified without passing evidence"
            )
    return errors


def load_report(path: Path) -> ReportDocument:
    return parse_report(path.read_text(encoding="utf-8"), filename=path.name)


def append_section(path: Path, section: ExperimentSection) -> ReportDocument:
    """Append a section inside the experiment region; all-or-nothing.

    The new file is written to a temp name and swapped in only after
    the spliced text re-parses.
    """
    doc = load_report(path)
    errors = validate_section(section)
    if errors:
        raise ReportError(errors)
    if section.id in doc.ids():
        raise ConflictError(f"section {section.id} already present in {path.name}")
    lines = list(doc.lines)
    rendered = render_section(section).split("\n")
    insert_at = doc.region_end
    new_lines = lines[:insert_at] + rendered + lines[insert_at:]
    new_text = "\n".join(new_lines)
    new_doc = parse_report(new_text, filename=path.name)  # belt and braces
    _atomic_write(path, new_text)
    return new_doc


def grade_claim(
    path: Path,
    section_id: ExperimentId,
    claim_index: int,
    grade: str,
    evidence_path: str | None = None,
    evidence_status: str | None = None,
) -> ReportDocument:
    """Update one claim's grade in place. Upgrading to verified requires
    passing evidence; downgrades are always allowed."""
    if grade not in GRADES:
        raise ValidationError(f"unknown claim grade {grade!r}")
    doc = load_report(path)
    section = doc.section(section_id)
    if not 0 <= claim_index < len(section.claims):
        raise ValidationError(f"{section_id} has no claim {claim_index}")
    old = section.claims[claim_index]
    if grade == "verified":
        new_evidence = evidence_path if evidence_path is not None else old.evidence_path
        new_status = evidence_status if evidence_path is not None else old.evidence_status
        if new_evidence is None or new_status != "pass":
            raise ValidationError(
                f"cannot mark {section_id} claim {claim_index} verified without passing evidence"
            )
    else:
        new_evidence = evidence_path if evidence_path is not None else old.evidence_path
        new_status = evidence_status if evidence_status is not None else old.evidence_status
    new_claim = replace(
        old, grade=grade, evidence_path=new_evidence, evidence_status=new_status
    )
    lines = list(doc.lines)
    lines[old.line - 1] = render_claim(new_claim)
    new_text = "\n".join(lines)
    new_doc = parse_report(new_text, filename=path.name)
    _atomic_write(path, new_text)
    return new_doc


def claim_violations(doc: ReportDocument) -> list[tuple[ExperimentId, int, Claim]]:
    """(section id, claim index, claim) for every unsound claim grade."""
    bad = []
    for section in doc.sections:
        for idx, claim in enumerate(section.claims):
            if not claim.sound:
                bad.append((section.id, idx, claim))
    return bad


# --------------------------------------------------------------------------
# TODO.md

TODO_KINDS = ("open_question", "unverified_claim", "deferred_work", "other")

_TODO_RE = re.compile(r"^- \[( |x)\] (.*)$")


@dataclass(frozen=True)
class TodoItem:
    text: str
    state: str = "open"  # open | done
    kind: str = "other"

    def __post_init__(self):
        if self.state not in ("open", "done"):
            raise ValidationError(f"unknown todo state {self.state!r}")
        if self.kind not in TODO_KINDS:
            raise ValidationError(f"unknown todo kind {self.kind!r}")
        if not self.text.strip():
            raise ValidationError("todo text must be non-empty")
        if "\n" in self.text:
            raise ValidationError("todo text must be a single line")


def render_todo(item: TodoItem) -> str:
    box = "x" if item.state == "done" else " "
    tag = "" if item.kind == "other" else f" ({item.kind})"
    return f"- [{box}] {item.text}{tag}"


def parse_todo_line(line: str) -> TodoItem | None:
    m = _TODO_RE.match(line)
    if not m:
        return None
    state = "done" if m.group(1) == "x" else "open"
    text = m.group(2)
    kind = "other"
    tag = re.search(r" \((open_question|unverified_claim|deferred_work)\)$", text)
    if tag:
        kind = tag.group(1)
        text = text[: tag.start()]
    return TodoItem(text=text, state=state, kind=kind)


def parse_todos(text: str) -> list[TodoItem]:
    items = []
    for line in text.split("\n"):
        item = parse_todo_line(line)
        if item is not None:
            items.append(item)
    return items


def sync_todos(path: Path, edits: list[tuple[str, ...]]) -> list[TodoItem]:
    """Apply edits to TODO.md in order and rewrite the file.

    Edits are tuples: ("add", text, kind), ("check", text),
    ("uncheck", text). Checking an unknown item fails with a
    nearest-match suggestion; completed items stay in the file.
    """
    text = path.read_text(encoding="utf-8") if path.exists() else ""
    lines = text.split("\n")
    # index of item lines, in file order
    item_lines = [i for i, line in enumerate(lines) if parse_todo_line(line) is not None]

    def find(needle: str) -> int:
        for i in item_lines:
            if parse_todo_line(lines[i]).text == needle:
                return i
        known = [parse_todo_line(lines[i]).text for i in item_lines]
        hint = difflib.get_close_matches(needle, known, n=1)
        suggestion = f"; did you mean {hint[0]!r}?" if hint else ""
        raise ValidationError(f"no todo item {needle!r}{suggestion}")

    for edit in edits:
        op = edit[0]
        if op == "add":
            _, text_, kind = edit
            item = TodoItem(text=text_, kind=kind)
            # keep a single trailing blank line at most
            while lines and lines[-1] == "":
                lines.pop()
            lines.append(render_todo(item))
            item_lines = [i for i, line in enumerate(lines) if parse_todo_line(line) is not None]
        elif op in ("check", "uncheck"):
            i = find(edit[1])
            item = parse_todo_line(lines[i])
            new_state = "done" if op == "check" else "open"
            lines[i] = render_todo(replace(item, state=new_state))
        else:
            raise ValidationError(f"unknown todo edit {op!r}")
    _atomic_write(path, "\n".join(lines) + ("\n" if lines and lines[-1] != "" else ""))
    return parse_todos(path.read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# Bibliography

@dataclass(frozen=True)
class BibEntry:
    key: str
    title: str = ""
    authors: str = ""
    year: str = ""
    venue: str = ""
    identifier: str = ""
    status: str = "unverified"  # unverified | verified
    source_url: str = ""
    matched_title: str = ""

    def __post_init__(self):
        if self.status == "verified" and not self.source_url:
            raise ValidationError(f"bib entry {self.key}: verified requires a source record")


_BIB_ENTRY_RE = re.compile(r"@(\w+)\s*\{\s*([^,\s}]+)\s*,")


def _bib_fields(body: str) -> dict[str, str]:
    fields = {}
    i = 0
    while i < len(body):
        m = re.compile(r"\s*(\w+)\s*=\s*").match(body, i)
        if not m:
            break
        name = m.group(1).lower()
        i = m.end()
        if i < len(body) and body[i] in "{\"":
            opener = body[i]
            closer = "}" if opener == "{" else '"'
            depth = 1
            j = i + 1
            while j < len(body) and depth:
                if opener == "{":
                    if body[j] == "{":
                        depth += 1
                    elif body[j] == "}":
                        depth -= 1
                elif body[j] == closer:
                    depth -= 1
                j += 1
            fields[name] = body[i + 1 : j - 1].strip()
            i = j
        else:
            m2 = re.compile(r"[^,}]*").match(body, i)
            fields[name] = m2.group(0).strip()
            i = m2.end()
        m3 = re.compile(r"\s*,?\s*").match(body, i)
        i = m3.end()
    return fields


def load_bib(bib_path: Path, status_path: Path) -> list[BibEntry]:
    """Entries from the bibliography database joined with the sidecar
    verification-status file."""
    if not bib_path.exists():
        return []
    text = bib_path.read_text(encoding="utf-8")
    status = {}
    if status_path.exists():
        status = json.loads(status_path.read_text(encoding="utf-8"))
    entries = []
    for m in _BIB_ENTRY_RE.finditer(text):
        start = m.end()
        depth = 1
        j = start
        while j < len(text) and depth:
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
            j += 1
        fields = _bib_fields(text[start : j - 1])
        key = m.group(2)
        record = status.get(key, {})
        entries.append(
            BibEntry(
                key=key,
                title=fields.get("title", ""),
                authors=fields.get("author", ""),
                year=fields.get("year", ""),
                venue=fields.get("journal", fields.get("booktitle", "")),
                identifier=fields.get("doi", fields.get("eprint", fields.get("url", ""))),
                status=record.get("status", "unverified"),
                source_url=record.get("url", ""),
                matched_title=record.get("matched_title", ""),
            )
        )
    return entries


def set_citation_status(
    status_path: Path, key: str, verified: bool, url: str = "", matched_title: str = ""
) -> None:
    """Flip one entry's verification state in the sidecar file."""
    if verified and not url:
        raise ValidationError("marking a citation verified requires the matched source URL")
    status = {}
    if status_path.exists():
        status = json.loads(status_path.read_text(encoding="utf-8"))
    if verified:
        status[key] = {"status": "verified", "url": url, "matched_title": matched_title}
    else:
        status[key] = {"status": "unverified"}
    _atomic_write(status_path, json.dumps(status, indent=2, sort_keys=True) + "\n")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
