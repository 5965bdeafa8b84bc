"""End-to-end annotator check: the built UI session code (run under node)
annotates a pose against a live service, exports a seed file, and the CLI
lift of that file must reproduce the exact bytes the UI displayed last.

Skipped when the frontend has not been built or node is unavailable; the
rest of the suite does not depend on the UI in any way.
"""

import json
import shutil
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

import posesynth as ps
from posesynth.cli import main
from posesynth.poseio import read_seed_file
from posesynth.seedlift import signs_from_pose

REPO = Path(__file__).resolve().parent.parent
DIST = REPO / "frontend" / "dist"

pytestmark = pytest.mark.skipif(
    not (DIST / "session.js").exists() or shutil.which("node") is None,
    reason="frontend not built or node missing")

NODE_DRIVER = """
import { ApiClient } from "%(dist)s/api.js";
import { AnnotationSession } from "%(dist)s/session.js";

const [base, entryJson] = process.argv.slice(2);
const entry = JSON.parse(entryJson);
const api = new ApiClient(base);
const layouts = await api.layouts();
const layout = layouts.find((l) => l.layout_id === entry.layout_id);

const session = new AnnotationSession(api, layout, entry.keypoints_px, entry.image_ref);
await session.loadEntry(entry);
// flip a couple of joints the way an annotator would, ending mid-pose
await session.toggleSign(5);
await session.toggleSign(12);
await session.toggleSign(5);

if (!session.canExport) throw new Error("export should be possible when settled");
console.log(JSON.stringify({
  seed: session.exportSeed(),
  displayed: session.displayed.bodyText,
  signs: session.signs,
}));
"""


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture
def server(tmp_path):
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-c",
         "import sys, uvicorn; from posesynth.service import create_app; "
         f"uvicorn.run(create_app(seed_store=r'{tmp_path / 'store'}'), "
         f"host='127.0.0.1', port={port}, log_level='warning')"])
    import httpx
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if httpx.get(base + "/layouts", timeout=1).status_code == 200:
                    break
            except httpx.TransportError:
                time.sleep(0.1)
        else:
            raise RuntimeError("service did not come up")
        yield base
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_exported_seed_relifts_to_displayed_bytes(server, tmp_path):
    lay = ps.get_layout("h36m17")
    rng = np.random.default_rng(21)
    pose = ps.spherical_to_cart(ps.random_params(lay, rng), lay)
    entry = {
        "image_ref": "frame021.jpg",
        "keypoints_px": (pose[:, :2] * 420.0 + 512.0).tolist(),
        "signs": [int(s) for s in signs_from_pose(pose, lay)],
        "layout_id": "h36m17",
    }

    driver = tmp_path / "driver.mjs"
    driver.write_text(NODE_DRIVER % {"dist": DIST.as_uri()})
    run = subprocess.run(
        ["node", str(driver), server, json.dumps(entry)],
        capture_output=True, text=True, timeout=60)
    assert run.returncode == 0, run.stderr
    out = json.loads(run.stdout)

    ok = False
    try:
        # the exported file must be a valid pipeline seed file
        seed_path = tmp_path / "exported.json"
        seed_path.write_text(out["seed"])
        [parsed] = read_seed_file(seed_path)
        assert parsed.layout_id == "h36m17"
        assert [int(s) for s in parsed.signs] == out["signs"]
        expected_signs = list(entry["signs"])
        expected_signs[12] = -expected_signs[12]  # 5 was flipped and flipped back
        assert out["signs"] == expected_signs

        # and the CLI lift of it must reproduce the displayed response bytes
        lifted = tmp_path / "lifted.json"
        res = CliRunner().invoke(main, ["lift", "--seed-file", str(seed_path),
                                        "--out", str(lifted)])
        assert res.exit_code == 0, res.output
        assert lifted.read_bytes() == b"[" + out["displayed"].encode() + b"]\n"
        ok = True
    finally:
        print(f"\n[ACCEPTANCE] ui-roundtrip: {'PASS' if ok else 'FAIL'}")
