import pytest
from fastapi.testclient import TestClient

from medsum.service import create_app
from medsum.backends import ExtractiveBackend
from medsum.store import StorageError, SummaryStore

from stubs import FailingBackend


@pytest.fixture
def store(tmp_path):
    s = SummaryStore(str(tmp_path / "svc.db"))
    yield s
    s.close()


@pytest.fixture
def client(store):
    app = create_app(store, ExtractiveBackend())
    with TestClient(app) as c:
        yield c


class TestSummarize:
    def test_happy_path(self, client, store):
        resp = client.post(
            "/api/v1/summarize",
            json={"model": "passage", "text": "The lungs are clear. No disease."},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["model"] == "passage"
        assert body["summary"]
        assert body["truncated_input"] is False
        # persisted record matches the response
        record = store.get_summary(body["id"])
        assert record.summarized == body["summary"]
        assert record.created_time.isoformat() == body["created_at"]

    def test_bad_model(self, client, store):
        resp = client.post("/api/v1/summarize", json={"model": "x", "text": "hi"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"
        assert store.count() == 0

    def test_empty_text(self, client, store):
        resp = client.post("/api/v1/summarize", json={"model": "passage", "text": "  "})
        assert resp.status_code == 400
        assert store.count() == 0

    def test_missing_fields(self, client):
        assert client.post("/api/v1/summarize", json={}).status_code == 400

    def test_non_json_body(self, client):
        resp = client.post(
            "/api/v1/summarize",
            content=b"not json",
            headers={"Content-Type": "application/json"},
        )
        assert resp.status_code == 400

    @pytest.mark.parametrize("body", [[], "str", 42, {"model": 3, "text": ["a"]}])
    def test_fuzzed_bodies_are_rejected_cleanly(self, client, body):
        resp = client.post("/api/v1/summarize", json=body)
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"

    def test_oversize_text(self, client):
        resp = client.post(
            "/api/v1/summarize",
            json={"model": "passage", "text": "x" * ((1 << 20) + 1)},
        )
        assert resp.status_code == 400

    def test_backend_down_persists_nothing(self, store):
        app = create_app(store, FailingBackend())
        with TestClient(app) as client:
            resp = client.post(
                "/api/v1/summarize", json={"model": "passage", "text": "some text."}
            )
            assert resp.status_code == 503
            assert resp.json()["code"] == "backend_unavailable"
            history = client.get("/api/v1/history").json()
            assert history["total"] == 0

    def test_storage_error_returns_500(self, tmp_path):
        store = SummaryStore(str(tmp_path / "b.db"))

        def boom(*args, **kwargs):
            raise StorageError("db gone")

        store.insert_summary = boom
        app = create_app(store, ExtractiveBackend())
        with TestClient(app) as client:
            resp = client.post(
                "/api/v1/summarize", json={"model": "passage", "text": "some text."}
            )
            assert resp.status_code == 500
            assert resp.json()["code"] == "storage_error"
        store.close()


class TestHistory:
    def test_empty(self, client):
        assert client.get("/api/v1/history").json() == {"items": [], "total": 0}

    def test_after_summarize(self, client):
        resp = client.post(
            "/api/v1/summarize", json={"model": "passage", "text": "Lungs clear."}
        )
        rid = resp.json()["id"]
        history = client.get("/api/v1/history").json()
        assert history["total"] == 1
        item = history["items"][0]
        assert item["id"] == rid
        assert set(item) == {"id", "input", "summary", "created_at"}

    def test_limit_newest_first(self, client):
        client.post("/api/v1/summarize", json={"model": "passage", "text": "First text."})
        client.post("/api/v1/summarize", json={"model": "passage", "text": "Second text."})
        history = client.get("/api/v1/history", params={"limit": 1}).json()
        assert len(history["items"]) == 1
        assert history["items"][0]["input"] == "Second text."
        assert history["total"] == 2

    def test_non_integer_params(self, client):
        resp = client.get("/api/v1/history", params={"limit": "abc"})
        assert resp.status_code == 400

    def test_bad_range_params(self, client):
        assert client.get("/api/v1/history", params={"limit": 0}).status_code == 400


class TestHealth:
    def test_all_healthy(self, client):
        resp = client.get("/api/v1/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "store": "ok", "backend": "ok"}

    def test_unconfigured_backend(self, store):
        app = create_app(store, backend=None)
        with TestClient(app) as client:
            assert client.get("/api/v1/health").json()["backend"] == "unconfigured"

    def test_store_down_still_200(self, store):
        def boom():
            raise StorageError("down")

        store.count = boom
        app = create_app(store, ExtractiveBackend())
        with TestClient(app) as client:
            resp = client.get("/api/v1/health")
            assert resp.status_code == 200
            assert resp.json()["store"] == "down"

    def test_backend_probe_down(self, store):
        class Probed(ExtractiveBackend):
            def healthy(self):
                return False

        app = create_app(store, Probed())
        with TestClient(app) as client:
            assert client.get("/api/v1/health").json()["backend"] == "down"
