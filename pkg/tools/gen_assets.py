#!/usr/bin/env python3
"""Regenerate the bundled rule assets and their integrity manifest.

Run from the repository root after editing any rule body below.
"""

import hashlib
from pathlib import Path

RULES = {
    "I": (
        "Never Break a Promise",
        'If you say "I will do X," do it.\n'
        "Under-promise, over-deliver.\n",
    ),
    "II": (
        "Never Manipulate Evaluation",
        "Do not change metrics, test sets, fixed hyperparameters, or problem\n"
        "definitions. Do not hardcode results or cherry-pick seeds.\n",
    ),
    "III": (
        "Never Fabricate Citations",
        "Every bibliography entry must be verified against the actual source\n"
        "before adding it. Search for the paper via web search. Confirm the\n"
        "exact title, full author list, year, venue, and identifier from the\n"
        "source. If you cannot find the paper, do not guess. Never write a\n"
        "citation from memory alone.\n",
    ),
    "IV": (
        "Complete All Autonomous Work Before Reporting",
        "Finish every task that does not need user input. Report once with\n"
        'all results. Never skip work because you estimate it "takes too\n'
        'long to implement".\n',
    ),
    "V": (
        "Make It Work Before Moving On",
        "An experiment crash is a bug, not a bad idea. Do not discard\n"
        "methods because of implementation failures. Investigate, fix, and\n"
        "re-run.\n",
    ),
    "VI": (
        "One Variable per Experiment",
        "Change exactly one thing per experiment. If two things change and\n"
        "the metric improves, you cannot know which helped.\n",
    ),
    "VII": (
        "Evaluate in Tiers",
        "Tier 1 (seconds): does it run without crashing?\n"
        "Tier 2 (minutes): any signal on a small subset?\n"
        "Tier 3: full evaluation, i.e., the real metric that goes into the\n"
        "report.\n"
        "Use small-scale runs to catch bugs only. Never draw conclusions\n"
        "from small-scale results.\n",
    ),
    "VIII": (
        "Bound Your Expectations",
        "Before implementing a heuristic, identify the theoretical best\n"
        "case, even if it is not realizable in practice. If you are\n"
        '"correcting" something, measure how much correction is\n'
        "theoretically possible.\n",
    ),
    "IX": (
        "Record Everything",
        "Every experiment gets a subsection in the report: goal, hypothesis,\n"
        "method, results table, analysis, next steps. Include failures. If\n"
        "it is not in the report, it did not happen. Visualize, don't just\n"
        "describe: create plots for distributions, comparisons, and scaling.\n"
        "Maintain TODO.md as a living checklist for open questions,\n"
        "unverified claims, and deferred work.\n",
    ),
    "X": (
        "Verify Before Claiming",
        "Assume you are wrong until verified. Write verification scripts,\n"
        "not just explanations. Actively try to falsify your own claims,\n"
        "test edge cases, randomize inputs, search for counterexamples.\n"
        "Grade claims: verified, partially verified, or unverified.\n",
    ),
    "C1": (
        "One Experiment per GPU; Use Them All",
        "Check nvidia-smi before every batch of work. Assign each\n"
        "independent experiment to its own GPU. Never leave GPUs idle when\n"
        "independent tasks remain.\n",
    ),
    "C2": (
        "Context Window Hygiene",
        "Prefer redirecting long-running output to log files and monitoring\n"
        "with tail. Only investigate logs in detail if something looks\n"
        "wrong.\n",
    ),
    "C3": (
        "Memory Management",
        "When observing out-of-memory (OOM) errors, do not conclude that the\n"
        'method "does not scale". Instead, systematically reduce memory:\n'
        "clear the GPU cache between experiments\n"
        "(torch.cuda.empty_cache()), enable gradient checkpointing, or\n"
        "process layers sequentially instead of in parallel. Print\n"
        "torch.cuda.memory_summary() to identify the allocation that causes\n"
        "the spike. Only after these mitigations fail is it valid to report\n"
        "a genuine scaling limitation.\n",
    ),
    "C4": (
        "Discover Nodes First; Dispatch Independent Experiments",
        "When a multi-node Slurm allocation is active, discover available\n"
        "nodes at session startup and dispatch independent experiments to\n"
        "remote nodes via remote-run. Each dispatched job runs in its own\n"
        "container on the target node with full GPU access. Never dispatch\n"
        "dependent work: only experiments that are fully independent may\n"
        "run on remote nodes.\n",
    ),
    "M1": (
        "Derivations Before Code",
        "Write derivations step-by-step before implementing.\n"
        "Cross-reference paper equations. Before implementing a new method,\n"
        "search for prior work to flag potential rediscovery.\n",
    ),
    "M2": (
        "Precise Notation",
        "Use precise index notation (G_jj, not G_j, for diagonal elements\n"
        "of a matrix). Define all notation before first use; dimensions,\n"
        "ranges, scalar vs. vector vs. matrix. Apply the same rigor to\n"
        "negative results as to positive ones.\n",
    ),
    "M3": (
        "Counterexample-First Reasoning",
        "Before attempting a proof, actively search for counterexamples:\n"
        "randomize inputs, test boundary cases, enumerate small instances\n"
        "exhaustively. If a counterexample exists, the search finds it\n"
        "faster than a failed proof attempt reveals the obstruction. If no\n"
        "counterexample survives, the search often exposes the structural\n"
        "property that makes the proof work.\n",
    ),
}

SOURCE_REVISION = "bundled-2026.08"


def main() -> None:
    root = Path(__file__).resolve().parent.parent
    asset_dir = root / "src" / "labrig" / "assets"
    cmd_dir = asset_dir / "commandments"
    cmd_dir.mkdir(parents=True, exist_ok=True)

    sums = [f"# source-revision: {SOURCE_REVISION}"]
    for rule_id, (title, body) in RULES.items():
        path = cmd_dir / f"{rule_id}.md"
        content = f"# {rule_id}. {title}\n\n{body}"
        path.write_text(content, encoding="utf-8")
        digest = hashlib.sha256(content.encode("utf-8")).hexdigest()
        sums.append(f"{digest}  commandments/{rule_id}.md")

    (asset_dir / "manifest.sum").write_text("\n".join(sums) + "\n", encoding="utf-8")
    print(f"wrote {len(RULES)} assets + manifest.sum under {asset_dir}")


if __name__ == "__main__":
    main()
