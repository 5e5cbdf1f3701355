from __future__ import annotations

import threading
from pathlib import Path

import pytest

from cal_bridge.models import load_model
from cal_bridge.server import make_server

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def stub_url():
    model = load_model(f"stub:{DATA / 'golden_curve.jsonl'}")
    server = make_server(model, host="127.0.0.1", port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join()
    server.server_close()
