"""Walk a complete consultation through the pipeline, end to end.

Runs entirely against the deterministic mock backend: reception routes the
first message, a short opening question triggers the clarification tree, the
scripted marks resume the dialogue, and closing produces the nine-section
report. Everything printed here is reproducible byte-for-byte.
"""

import json
import tempfile

from lawluo.core import AblationConfig
from lawluo.orchestrator import default_orchestrator, fixed_clock, run_script
from lawluo.secretary import render_text

SCRIPT = [
    "I want a divorce, what should I do?",
    "@marks 2=yes 3=no 5=yes",
    "We have been married 5 years and own an apartment together in the city center district.",
    "My spouse does not agree to the divorce and refuses to discuss the division of our property.",
    "There are no children involved and I mainly want to keep my share of the apartment value.",
]


def main() -> None:
    data_dir = tempfile.mkdtemp(prefix="lawluo-demo-")
    orchestrator = default_orchestrator(data_dir, clock=fixed_clock("2024-01-01T00:00:00+00:00"))
    outcome = run_script(
        orchestrator,
        AblationConfig(),
        SCRIPT,
        seed=7,
        created_date="2024-01-01",
    )

    print("=== transcript ===")
    print(outcome["transcript"])

    print("=== event log (types only) ===")
    for line in outcome["event_log"].strip().splitlines():
        record = json.loads(line)
        print(f"  {record['seq']:2d}  {record['event_type']}")

    print()
    print("=== report ===")
    print(render_text(outcome["report"]))


if __name__ == "__main__":
    main()
