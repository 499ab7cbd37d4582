import threading
import uuid

import pytest

from medsum.store import NotFound, SummaryStore, ValidationError


@pytest.fixture
def store(tmp_path):
    s = SummaryStore(str(tmp_path / "test.db"))
    yield s
    s.close()


class TestInsert:
    def test_construction_contract(self, store):
        record = store.insert_summary("a", "b")
        uuid.UUID(record.id)  # parseable
        assert record.input == "a" and record.summarized == "b"

    def test_distinct_ids(self, store):
        a = store.insert_summary("a", "b")
        b = store.insert_summary("a", "b")
        assert a.id != b.id

    def test_empty_rejected(self, store):
        with pytest.raises(ValidationError):
            store.insert_summary("", "b")
        with pytest.raises(ValidationError):
            store.insert_summary("a", "")

    def test_many_inserts_unique_and_monotone(self, store):
        records = [store.insert_summary(f"in{i}", f"out{i}") for i in range(500)]
        assert len({r.id for r in records}) == 500
        times = [r.created_time for r in records]
        assert all(t1 <= t2 for t1, t2 in zip(times, times[1:]))

    def test_concurrent_inserts(self, store):
        ids = []
        lock = threading.Lock()

        def worker(n):
            for i in range(20):
                record = store.insert_summary(f"i{n}-{i}", "s")
                with lock:
                    ids.append(record.id)

        threads = [threading.Thread(target=worker, args=(n,)) for n in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(ids) == 160
        assert len(set(ids)) == 160
        assert store.count() == 160


class TestList:
    def test_empty(self, store):
        assert store.list_summaries() == []

    def test_newest_first(self, store):
        store.insert_summary("one", "s1")
        store.insert_summary("two", "s2")
        store.insert_summary("three", "s3")
        top2 = store.list_summaries(limit=2)
        assert [r.input for r in top2] == ["three", "two"]

    def test_pagination(self, store):
        for i in range(3):
            store.insert_summary(f"in{i}", "s")
        rest = store.list_summaries(limit=2, offset=2)
        assert [r.input for r in rest] == ["in0"]

    def test_pages_partition_full_listing(self, store):
        for i in range(10):
            store.insert_summary(f"in{i}", "s")
        full = store.list_summaries(limit=10)
        paged = store.list_summaries(limit=4) + store.list_summaries(
            limit=4, offset=4
        ) + store.list_summaries(limit=4, offset=8)
        assert [r.id for r in paged] == [r.id for r in full]

    def test_bad_params(self, store):
        with pytest.raises(ValidationError):
            store.list_summaries(limit=0)
        with pytest.raises(ValidationError):
            store.list_summaries(limit=1, offset=-1)


class TestGet:
    def test_roundtrip(self, store):
        inserted = store.insert_summary("input text", "summary text")
        fetched = store.get_summary(inserted.id)
        assert fetched == inserted

    def test_random_uuid_not_found(self, store):
        with pytest.raises(NotFound):
            store.get_summary(str(uuid.uuid4()))

    def test_malformed_uuid(self, store):
        with pytest.raises(ValidationError):
            store.get_summary("not-a-uuid")

    def test_persists_across_reopen(self, tmp_path):
        path = str(tmp_path / "re.db")
        s1 = SummaryStore(path)
        record = s1.insert_summary("a", "b")
        s1.close()
        s2 = SummaryStore(path)
        assert s2.get_summary(record.id).summarized == "b"
        s2.close()
