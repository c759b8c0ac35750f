"""
Triage of a full campaign
=========================

Run the whole catalog against the demo application with every vulnerability
seeded and read the report the way a tester would: relation by relation,
looking at the requests each failure was the first to exercise.
"""

import json
import tempfile
from pathlib import Path

from smrlmt.cli import main
from smrlmt.fixture import serve_fixture

work = Path(tempfile.mkdtemp(prefix="smrlmt-"))
site = serve_fixture(["V1", "V2", "V3", "V4"])
(work / "target.toml").write_text(site.target_toml())

main(["crawl", "--target", str(work / "target.toml"), "--out", str(work / "pool")])
site.reset()
code = main(["test", "--pool", str(work / "pool"), "--target", str(work / "target.toml"), "--report", str(work / "campaign.json")])
print("exit code", code)
site.stop()

report = json.loads((work / "campaign.json").read_text())

# raw failures are every false verdict; reported ones each add requests no
# earlier report covered, so the list stays short
for rel in report["relations"]:
    print(f"\n{rel['relation']}: {rel['raw_failures']} raw, {rel['reported_failures']} reported")
    for f in rel["failures"]:
        novel = sorted({(m, url.split("/", 3)[-1], tuple(map(tuple, p))) for m, url, p in f["novel_requests"]})
        print("  views", f["view_indices"])
        for m, path, params in novel:
            print("    ", m, "/" + path, dict(params) or "")

# page bodies live next to the report, named by their digest
bodies = work / "campaign.json.bodies"
print("\n", len(list(bodies.iterdir())), "distinct bodies under", bodies)
